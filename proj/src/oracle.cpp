// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ctp::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> top_variance_channels(const Matrix& hidden, std::size_t q) {
    const std::size_t n = hidden.rows();
    const std::size_t d = hidden.cols();
    std::vector<double> var(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += hidden(i, c);
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss += (hidden(i, c) - mean) * (hidden(i, c) - mean);
        }
        var[c] = ss / static_cast<double>(n);
    }
    std::vector<bool> taken(d, false);
    std::vector<std::size_t> ids;
    for (std::size_t round = 0; round < std::min(q, d); ++round) {
        std::size_t best = d;
        for (std::size_t c = 0; c < d; ++c) {
            if (!taken[c] && (best == d || var[c] > var[best])) {
                best = c;
            }
        }
        taken[best] = true;
        ids.push_back(best);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

double cosine(const Matrix& hidden, const std::vector<std::size_t>& ids, std::size_t a, std::size_t b) {
    if (a == b) {
        return 1.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const std::size_t c : ids) {
        dot += hidden(a, c) * hidden(b, c);
    }
    for (const std::size_t c : ids) {
        na += hidden(a, c) * hidden(a, c);
    }
    for (const std::size_t c : ids) {
        nb += hidden(b, c) * hidden(b, c);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12) {
        return 0.0;
    }
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

double grid_distance(const TokenGrid& grid, std::size_t a, std::size_t b) {
    const auto w = static_cast<std::int64_t>(grid.width());
    const auto plane = static_cast<std::int64_t>(grid.width() * grid.height());
    const auto ia = static_cast<std::int64_t>(a);
    const auto ib = static_cast<std::int64_t>(b);
    const std::int64_t dx = (ia % plane) % w - (ib % plane) % w;
    const std::int64_t dy = (ia % plane) / w - (ib % plane) / w;
    const std::int64_t dt = ia / plane - ib / plane;
    return std::sqrt(static_cast<double>(dx * dx + dy * dy + dt * dt));
}

double grid_dmax(const TokenGrid& grid) {
    const auto h = static_cast<double>(grid.height());
    const auto w = static_cast<double>(grid.width());
    const auto t = static_cast<double>(grid.frames());
    return grid.frames() > 1 ? std::sqrt(h * h + w * w + t * t) : std::sqrt(h * h + w * w);
}

/// Everything the naive pipeline needs to evaluate one instance.
struct Instance {
    const FeatureSet& features;
    const TokenGrid& grid;
    std::vector<std::size_t> channels;
    double dmax;

    double sim(std::size_t a, std::size_t b) const { return cosine(features.hidden, channels, a, b); }
    double dist(std::size_t a, std::size_t b) const { return grid_distance(grid, a, b); }

    /// max over j in S of M_ij * (1 + lambda * delta_i / dmax), all from scratch.
    double modulated_max(std::size_t i, const std::vector<std::size_t>& selected, double lambda) const {
        double delta = kInf;
        for (const std::size_t j : selected) {
            delta = std::min(delta, dist(i, j));
        }
        double best = -kInf;
        for (const std::size_t j : selected) {
            best = std::max(best, sim(i, j) * (1.0 + lambda * (delta / dmax)));
        }
        return best;
    }
};

std::vector<std::size_t> naive_pivots(const Matrix& keys, std::size_t kappa) {
    const std::size_t n = keys.rows();
    std::vector<std::size_t> chosen;
    std::vector<bool> used(n, false);
    double best_l1 = -1.0;
    std::size_t first = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double l1 = 0.0;
        for (std::size_t k = 0; k < keys.cols(); ++k) {
            l1 += std::abs(keys(j, k));
        }
        if (l1 > best_l1) {
            best_l1 = l1;
            first = j;
        }
    }
    chosen.push_back(first);
    used[first] = true;
    while (chosen.size() < kappa) {
        std::size_t pick = n;
        double pick_score = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) {
                continue;
            }
            double nearest = kInf;
            for (const std::size_t p : chosen) {
                double sq = 0.0;
                for (std::size_t k = 0; k < keys.cols(); ++k) {
                    sq += (keys(j, k) - keys(p, k)) * (keys(j, k) - keys(p, k));
                }
                nearest = std::min(nearest, sq);
            }
            if (nearest > pick_score) {
                pick_score = nearest;
                pick = j;
            }
        }
        chosen.push_back(pick);
        used[pick] = true;
    }
    return chosen;
}

}  // namespace

Matrix reference_similarity(const Matrix& hidden, std::size_t q) {
    const auto ids = top_variance_channels(hidden, q);
    Matrix out(hidden.rows(), hidden.rows());
    for (std::size_t i = 0; i < hidden.rows(); ++i) {
        for (std::size_t j = 0; j < hidden.rows(); ++j) {
            out(i, j) = cosine(hidden, ids, i, j);
        }
    }
    return out;
}

Matrix reference_distances(const TokenGrid& grid) {
    const std::size_t n = grid.token_count();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out(i, j) = grid_distance(grid, i, j);
        }
    }
    return out;
}

PruneResult reference_prune(const FeatureSet& features, const TokenGrid& grid, const PrunerConfig& cfg) {
    validate_features(features, grid);
    PruneResult result;
    result.grid = grid;
    result.config = validate_config(cfg, grid, features);
    const PrunerConfig& eff = result.config.effective;
    const std::size_t n = grid.token_count();
    const std::size_t budget = eff.retain;
    const double lambda = eff.bss_strength;

    const Instance inst{features, grid, top_variance_channels(features.hidden, eff.channels), grid_dmax(grid)};

    std::vector<std::size_t> selected = naive_pivots(features.keys, eff.pivots);
    std::vector<bool> in_s(n, false);
    for (const std::size_t p : selected) {
        in_s[p] = true;
        result.trace.entries.push_back({p, result.trace.entries.size() + 1, Stage::pivot, -1, std::nullopt});
    }

    if (budget == n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_s[i]) {
                in_s[i] = true;
                selected.push_back(i);
                result.trace.entries.push_back({i, result.trace.entries.size() + 1, Stage::greedy, 0, eff.tau0});
            }
        }
    }

    int loop = 0;
    double tau = eff.tau0;
    while (selected.size() < budget) {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_s[i]) {
                order.emplace_back(1.0 - inst.modulated_max(i, selected, lambda), i);
            }
        }
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });

        std::size_t added = 0;
        for (std::size_t start = 0; start < order.size(); start += eff.batch) {
            if (selected.size() >= budget) {
                break;
            }
            const std::vector<std::size_t> snapshot = selected;
            std::vector<std::size_t> accepted;
            for (std::size_t k = start; k < std::min(start + eff.batch, order.size()); ++k) {
                if (snapshot.size() + accepted.size() == budget) {
                    break;
                }
                const std::size_t i = order[k].second;
                if (inst.modulated_max(i, snapshot, lambda) < tau) {
                    accepted.push_back(i);
                }
            }
            for (const std::size_t i : accepted) {
                in_s[i] = true;
                selected.push_back(i);
                result.trace.entries.push_back({i, result.trace.entries.size() + 1, Stage::greedy, loop, tau});
            }
            added += accepted.size();
        }
        if (selected.size() >= budget) {
            break;
        }
        if (added == 0 && tau > 1.0 + lambda) {
            break;
        }
        loop += 1;
        tau += eff.dtau;
    }

    std::vector<std::size_t> kept = selected;
    std::sort(kept.begin(), kept.end());
    for (const std::size_t j : kept) {
        result.clusters[j] = {};
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (in_s[u]) {
            continue;
        }
        std::size_t owner = kept[0];
        double best = inst.sim(u, owner);
        for (std::size_t k = 1; k < kept.size(); ++k) {
            if (inst.sim(u, kept[k]) > best) {
                best = inst.sim(u, kept[k]);
                owner = kept[k];
            }
        }
        result.clusters[owner].push_back(u);
    }

    const Matrix& h = features.hidden;
    result.updated_hidden = Matrix(selected.size(), h.cols());
    for (std::size_t r = 0; r < selected.size(); ++r) {
        const std::size_t j = selected[r];
        const auto& members = result.clusters[j];
        if (members.empty()) {
            for (std::size_t c = 0; c < h.cols(); ++c) {
                result.updated_hidden(r, c) = h(j, c);
            }
            continue;
        }
        std::vector<double> w;
        double total = 0.0;
        for (const std::size_t u : members) {
            const double m = inst.sim(u, j);
            w.push_back(eff.raw_swa_weights ? m : (m > 0.0 ? m : 0.0));
            total += w.back();
        }
        for (auto& v : w) {
            v = v / (total + eff.eps);
        }
        for (std::size_t c = 0; c < h.cols(); ++c) {
            double pooled = 0.0;
            for (std::size_t m = 0; m < members.size(); ++m) {
                pooled += w[m] * h(members[m], c);
            }
            result.updated_hidden(r, c) = eff.blend * h(j, c) + (1.0 - eff.blend) * pooled;
        }
    }
    return result;
}

namespace {

template <typename Reduce>
double objective(const SelectionTrace& trace, const Matrix& sim, const Matrix& dist, double dmax, double lambda,
                 Reduce reduce) {
    const std::size_t n = sim.rows();
    std::vector<bool> in_s(n, false);
    for (const auto& e : trace.entries) {
        in_s.at(e.index) = true;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_s[i]) {
            continue;
        }
        double delta = kInf;
        for (const auto& e : trace.entries) {
            delta = std::min(delta, dist(i, e.index));
        }
        std::vector<double> row;
        for (const auto& e : trace.entries) {
            row.push_back(sim(i, e.index) * (1.0 + lambda * (delta / dmax)));
        }
        total += reduce(row);
    }
    return total;
}

}  // namespace

double objective_novelty(const SelectionTrace& trace, const Matrix& sim, const Matrix& dist, double dmax,
                         double lambda) {
    return objective(trace, sim, dist, dmax, lambda, [](const std::vector<double>& row) {
        return 1.0 - *std::max_element(row.begin(), row.end());
    });
}

double objective_literal(const SelectionTrace& trace, const Matrix& sim, const Matrix& dist, double dmax,
                         double lambda) {
    return objective(trace, sim, dist, dmax, lambda, [](const std::vector<double>& row) {
        return *std::min_element(row.begin(), row.end());
    });
}

}  // namespace ctp::oracle
