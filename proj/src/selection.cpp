// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctp {

std::vector<std::size_t> init_pivots(const Matrix& keys, std::size_t kappa) {
    const std::size_t n = keys.rows();
    kappa = std::min(kappa, n);
    std::vector<std::size_t> pivots;
    if (kappa == 0) {
        return pivots;
    }
    pivots.reserve(kappa);

    std::size_t first = 0;
    double best_l1 = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
        double l1 = 0.0;
        for (const double v : keys.row(j)) {
            l1 += std::abs(v);
        }
        if (l1 > best_l1) {
            best_l1 = l1;
            first = j;
        }
    }
    pivots.push_back(first);

    std::vector<bool> chosen(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t latest = first;
    while (pivots.size() < kappa) {
        chosen[latest] = true;
        const auto anchor = keys.row(latest);
        for (std::size_t j = 0; j < n; ++j) {
            if (chosen[j]) {
                continue;
            }
            double sq = 0.0;
            const auto row = keys.row(j);
            for (std::size_t k = 0; k < row.size(); ++k) {
                const double diff = row[k] - anchor[k];
                sq += diff * diff;
            }
            nearest[j] = std::min(nearest[j], sq);
        }
        std::size_t next = n;
        double best = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!chosen[j] && nearest[j] > best) {
                best = nearest[j];
                next = j;
            }
        }
        pivots.push_back(next);
        latest = next;
    }
    return pivots;
}

BssState::BssState(const SimilarityMatrix& sim, const DistanceMatrix& dist, std::span<const std::size_t> initial)
    : m_sim(sim),
      m_dist(dist),
      m_candidate(sim.size(), true),
      m_candidate_count(sim.size()),
      m_min_dist(sim.size(), std::numeric_limits<double>::infinity()),
      m_max_sim(sim.size(), -std::numeric_limits<double>::infinity()) {
    if (dist.size() != sim.size()) {
        throw ShapeError("similarity and distance matrices differ in size");
    }
    for (const std::size_t p : initial) {
        add(p);
    }
}

void BssState::add(std::size_t index) {
    if (index >= m_candidate.size() || !m_candidate[index]) {
        throw std::invalid_argument("token " + std::to_string(index) + " is not a candidate");
    }
    m_candidate[index] = false;
    --m_candidate_count;
    m_selected.push_back(index);
    const auto dist_row = m_dist.values.row(index);
    const auto sim_row = m_sim.values.row(index);
    for (std::size_t i = 0; i < m_candidate.size(); ++i) {
        if (!m_candidate[i]) {
            continue;
        }
        m_min_dist[i] = std::min(m_min_dist[i], dist_row[i]);
        m_max_sim[i] = std::max(m_max_sim[i], sim_row[i]);
    }
}

std::vector<std::size_t> BssState::candidates() const {
    std::vector<std::size_t> out;
    out.reserve(m_candidate_count);
    for (std::size_t i = 0; i < m_candidate.size(); ++i) {
        if (m_candidate[i]) {
            out.push_back(i);
        }
    }
    return out;
}

void update_min_dist(BssState& state, std::size_t newly_selected) {
    state.add(newly_selected);
}

std::vector<double> bss_modulated_row(std::size_t i, const SimilarityMatrix& sim, const BssState& state,
                                      const DistanceMatrix& dist, double lambda) {
    if (i >= sim.size() || !state.is_candidate(i)) {
        throw std::invalid_argument("token " + std::to_string(i) + " is not a candidate");
    }
    const double gain = 1.0 + lambda * (state.min_dist()[i] / dist.dmax);
    std::vector<double> row;
    row.reserve(state.selected().size());
    for (const std::size_t j : state.selected()) {
        row.push_back(sim(i, j) * gain);
    }
    return row;
}

std::vector<CandidateScore> non_duplication_scores(const SimilarityMatrix& sim, const BssState& state,
                                                   const DistanceMatrix& dist, double lambda) {
    (void)sim;
    (void)dist;
    std::vector<CandidateScore> out;
    out.reserve(state.candidate_count());
    for (std::size_t i = 0; i < state.candidate_mask().size(); ++i) {
        if (state.is_candidate(i)) {
            out.push_back({i, 1.0 - state.modulated_max(i, lambda)});
        }
    }
    return out;
}

SelectionTrace greedy_select(const SimilarityMatrix& sim, const DistanceMatrix& dist,
                             std::span<const std::size_t> pivots, const PrunerConfig& cfg) {
    const std::size_t n = sim.size();
    const std::size_t budget = std::min(cfg.retain, n);
    if (pivots.empty() || pivots.size() > budget) {
        throw std::invalid_argument("greedy_select needs between 1 and R pivots");
    }

    SelectionTrace trace;
    for (const std::size_t p : pivots) {
        trace.append(p, Stage::pivot, -1, std::nullopt);
    }

    if (budget == n) {
        std::vector<bool> taken(n, false);
        for (const std::size_t p : pivots) {
            taken[p] = true;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                trace.append(i, Stage::greedy, 0, cfg.tau0);
            }
        }
        return trace;
    }

    const double lambda = cfg.bss_strength;
    const double ceiling = 1.0 + lambda;
    BssState state(sim, dist, pivots);
    state.loop = 0;
    state.tau = cfg.tau0;

    std::vector<CandidateScore> ranked;
    std::vector<std::size_t> accepted;
    while (state.selected().size() < budget) {
        ranked = non_duplication_scores(sim, state, dist, lambda);
        std::sort(ranked.begin(), ranked.end(), [](const CandidateScore& a, const CandidateScore& b) {
            return a.score > b.score || (a.score == b.score && a.index < b.index);
        });

        std::size_t added = 0;
        for (std::size_t start = 0; start < ranked.size() && state.selected().size() < budget;
             start += cfg.batch) {
            const std::size_t stop = std::min(start + cfg.batch, ranked.size());
            const std::size_t room = budget - state.selected().size();
            accepted.clear();
            for (std::size_t k = start; k < stop && accepted.size() < room; ++k) {
                const std::size_t i = ranked[k].index;
                if (state.modulated_max(i, lambda) < state.tau) {
                    accepted.push_back(i);
                }
            }
            for (const std::size_t i : accepted) {
                trace.append(i, Stage::greedy, state.loop, state.tau);
            }
            for (const std::size_t i : accepted) {
                state.add(i);
            }
            added += accepted.size();
        }

        if (state.selected().size() >= budget) {
            break;
        }
        if (added == 0 && state.tau > ceiling) {
            break;
        }
        ++state.loop;
        state.tau += cfg.dtau;
    }
    return trace;
}

}  // namespace ctp
