// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ctp/pipeline.hpp"
#include "ctp/recovery.hpp"
#include "ctp/rng.hpp"
#include "ctp/similarity.hpp"

namespace ctp::harness {

namespace {

// Scene distribution. Object tokens: centroid + kObjectNoise * N(0, I), so two tokens of
// the same object have expected cosine 1 / (1 + kObjectNoise^2) ~ 0.94. Background tokens:
// shared base + kSmoothModes low-frequency spatial modes + kBackgroundNoise * N(0, I).
// Object key centroids are scaled by kObjectKeyGain so objects dominate the key norms.
constexpr double kObjectNoise = 0.25;
constexpr double kBackgroundNoise = 0.6;
constexpr std::size_t kSmoothModes = 3;
constexpr double kObjectKeyGain = 1.5;
constexpr double kMinFrequency = 0.5;  // cycles across the grid
constexpr double kMaxFrequency = 1.5;
constexpr double kFramePhaseStep = 0.3;  // radians per frame
constexpr std::size_t kPlacementAttempts = 1000;

struct Mode {
    std::vector<double> direction;
    double fx = 0.0;
    double fy = 0.0;
    double phase = 0.0;
};

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim, double scale = 1.0) {
    std::vector<double> v(dim);
    for (auto& x : v) {
        x = scale * rng.normal();
    }
    return v;
}

/// Fills one feature matrix for the scene layout. `owner[i]` is the object of token i or -1.
Matrix synthesize(Rng& rng, const TokenGrid& grid, const std::vector<int>& owner, std::size_t n_objects,
                  std::size_t dim, double object_gain) {
    std::vector<std::vector<double>> centroids;
    for (std::size_t o = 0; o < n_objects; ++o) {
        centroids.push_back(gaussian_vector(rng, dim, object_gain));
    }
    const auto base = gaussian_vector(rng, dim);
    std::vector<Mode> modes;
    for (std::size_t k = 0; k < kSmoothModes; ++k) {
        Mode m;
        m.direction = gaussian_vector(rng, dim);
        m.fx = rng.uniform(kMinFrequency, kMaxFrequency);
        m.fy = rng.uniform(kMinFrequency, kMaxFrequency);
        m.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        modes.push_back(std::move(m));
    }

    const std::size_t n = grid.token_count();
    Matrix out(n, dim);
    std::vector<double> weight(kSmoothModes);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.row(i);
        if (owner[i] >= 0) {
            const auto& c = centroids[static_cast<std::size_t>(owner[i])];
            for (std::size_t k = 0; k < dim; ++k) {
                row[k] = c[k] + kObjectNoise * rng.normal();
            }
            continue;
        }
        const Coord p = coords_of(i, grid);
        for (std::size_t m = 0; m < kSmoothModes; ++m) {
            const double arg = 2.0 * std::numbers::pi *
                                   (modes[m].fx * static_cast<double>(p.x) / static_cast<double>(grid.width()) +
                                    modes[m].fy * static_cast<double>(p.y) / static_cast<double>(grid.height())) +
                               modes[m].phase + kFramePhaseStep * static_cast<double>(p.t);
            weight[m] = std::sin(arg);
        }
        for (std::size_t k = 0; k < dim; ++k) {
            double v = base[k];
            for (std::size_t m = 0; m < kSmoothModes; ++m) {
                v += weight[m] * modes[m].direction[k];
            }
            row[k] = v + kBackgroundNoise * rng.normal();
        }
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

MetricSummary summarize_values(std::vector<double> values) {
    MetricSummary s;
    if (values.empty()) {
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

}  // namespace

SyntheticScene gen_scene(const TokenGrid& grid, std::size_t n_objects, std::uint64_t seed,
                         const SceneParams& params) {
    if (params.hidden_dim == 0 || params.key_dim == 0) {
        throw GenerationError("scene feature dimensions must be positive");
    }
    Rng rng(seed);
    SyntheticScene scene;
    scene.grid = grid;
    scene.seed = seed;
    scene.params = params;

    const std::size_t n = grid.token_count();
    const std::size_t h = grid.height();
    const std::size_t w = grid.width();
    const std::size_t r_hi = std::min(h, w) / 6;
    const std::size_t r_lo = std::max<std::size_t>(r_hi / 2, r_hi > 0 ? 1 : 0);

    std::vector<int> owner(n, -1);
    for (std::size_t o = 0; o < n_objects; ++o) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const std::size_t r = r_lo + rng.below(r_hi - r_lo + 1);
            if (w < 2 * r + 1 || h < 2 * r + 1) {
                continue;
            }
            const std::size_t cx = r + rng.below(w - 2 * r);
            const std::size_t cy = r + rng.below(h - 2 * r);
            std::vector<std::size_t> blob;
            bool clash = false;
            for (std::size_t t = 0; t < grid.frames() && !clash; ++t) {
                for (std::size_t y = cy - r; y <= cy + r && !clash; ++y) {
                    for (std::size_t x = cx - r; x <= cx + r; ++x) {
                        const auto dx = static_cast<double>(x) - static_cast<double>(cx);
                        const auto dy = static_cast<double>(y) - static_cast<double>(cy);
                        if (dx * dx + dy * dy > static_cast<double>(r * r)) {
                            continue;
                        }
                        const std::size_t idx = index_of({x, y, t}, grid);
                        if (owner[idx] >= 0) {
                            clash = true;
                            break;
                        }
                        blob.push_back(idx);
                    }
                }
            }
            if (clash || blob.empty()) {
                continue;
            }
            for (const std::size_t idx : blob) {
                owner[idx] = static_cast<int>(o);
            }
            std::sort(blob.begin(), blob.end());
            scene.object_masks.push_back(std::move(blob));
            placed = true;
        }
        if (!placed) {
            throw GenerationError("could not place object " + std::to_string(o + 1) + " of " +
                                  std::to_string(n_objects) + " on a " + std::to_string(h) + "x" + std::to_string(w) +
                                  " grid after " + std::to_string(kPlacementAttempts) + " attempts");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (owner[i] < 0) {
            scene.background_ids.push_back(i);
        }
    }
    scene.features.hidden = synthesize(rng, grid, owner, n_objects, params.hidden_dim, 1.0);
    scene.features.keys = synthesize(rng, grid, owner, n_objects, params.key_dim, kObjectKeyGain);
    return scene;
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::bss:
            return "bss";
        case Strategy::redundancy_only:
            return "redundancy_only";
        case Strategy::random:
            return "random";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view label) {
    if (label == "bss") {
        return Strategy::bss;
    }
    if (label == "redundancy_only") {
        return Strategy::redundancy_only;
    }
    if (label == "random") {
        return Strategy::random;
    }
    throw std::invalid_argument("unknown strategy '" + std::string(label) +
                                "' (expected bss, redundancy_only or random)");
}

PruneResult run_strategy(const SyntheticScene& scene, Strategy strategy, const PrunerConfig& cfg,
                         std::uint64_t seed) {
    switch (strategy) {
        case Strategy::bss:
            return prune(scene.features, scene.grid, cfg);
        case Strategy::redundancy_only: {
            PrunerConfig flat = cfg;
            flat.bss_strength = 0.0;
            return prune(scene.features, scene.grid, flat);
        }
        case Strategy::random:
            break;
    }

    validate_features(scene.features, scene.grid);
    PruneResult result;
    result.grid = scene.grid;
    result.config = validate_config(cfg, scene.grid, scene.features);
    const PrunerConfig& eff = result.config.effective;
    const std::size_t n = scene.grid.token_count();

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t k = 0; k < eff.retain; ++k) {
        const std::size_t pick = k + rng.below(n - k);
        std::swap(pool[k], pool[pick]);
        result.trace.append(pool[k], Stage::sampled, 0, std::nullopt);
    }

    const SimilarityMatrix sim = cosine_matrix(screen_channels(scene.features.hidden, eff.channels));
    ClusterAssignment assignment = assign_clusters(result.trace, sim);
    result.updated_hidden = swa_update(scene.features.hidden, result.trace, assignment, sim,
                                       {eff.blend, eff.eps, eff.raw_swa_weights});
    result.clusters = std::move(assignment.members);
    return result;
}

MetricsReport compute_metrics(const PruneResult& result, const SyntheticScene& scene, std::string strategy,
                              std::uint64_t seed, std::size_t recall_radius) {
    const TokenGrid& grid = scene.grid;
    const auto selected = result.trace.indices();
    MetricsReport report;
    report.strategy = std::move(strategy);
    report.seed = seed;

    std::vector<Coord> pos;
    pos.reserve(selected.size());
    for (const std::size_t i : selected) {
        pos.push_back(coords_of(i, grid));
    }
    for (const Coord& p : pos) {
        if (p.x == 0 || p.x + 1 == grid.width() || p.y == 0 || p.y + 1 == grid.height()) {
            ++report.edge_token_count;
        }
    }

    if (selected.size() > 1) {
        const SimilarityMatrix sim =
            cosine_matrix(screen_channels(scene.features.hidden, result.config.effective.channels));
        double dist_sum = 0.0;
        double sim_sum = 0.0;
        for (std::size_t a = 0; a < selected.size(); ++a) {
            double nearest = std::numeric_limits<double>::infinity();
            double closest = -std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < selected.size(); ++b) {
                if (a == b) {
                    continue;
                }
                nearest = std::min(nearest, spatial_distance(selected[a], selected[b], grid));
                closest = std::max(closest, sim(selected[a], selected[b]));
            }
            dist_sum += nearest;
            sim_sum += closest;
        }
        report.dispersion = dist_sum / static_cast<double>(selected.size());
        report.redundancy = sim_sum / static_cast<double>(selected.size());
    }

    std::size_t object_tokens = 0;
    std::size_t covered = 0;
    const auto gap = [](std::size_t u, std::size_t v) { return u > v ? u - v : v - u; };
    for (const auto& mask : scene.object_masks) {
        for (const std::size_t i : mask) {
            ++object_tokens;
            const Coord c = coords_of(i, grid);
            const bool hit = std::any_of(pos.begin(), pos.end(), [&](const Coord& p) {
                return gap(p.x, c.x) <= recall_radius && gap(p.y, c.y) <= recall_radius &&
                       gap(p.t, c.t) <= recall_radius;
            });
            covered += hit ? 1 : 0;
        }
    }
    report.object_recall =
        object_tokens == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(object_tokens);
    return report;
}

StrategySummary summarize(std::string strategy, std::span<const MetricsReport> records) {
    std::vector<double> edge;
    std::vector<double> disp;
    std::vector<double> red;
    std::vector<double> recall;
    for (const auto& r : records) {
        if (r.strategy != strategy) {
            continue;
        }
        edge.push_back(static_cast<double>(r.edge_token_count));
        disp.push_back(r.dispersion);
        red.push_back(r.redundancy);
        recall.push_back(r.object_recall);
    }
    StrategySummary s;
    s.strategy = std::move(strategy);
    s.runs = edge.size();
    s.edge_tokens = summarize_values(std::move(edge));
    s.dispersion = summarize_values(std::move(disp));
    s.redundancy = summarize_values(std::move(red));
    s.object_recall = summarize_values(std::move(recall));
    return s;
}

CorpusReport corpus_experiment(std::size_t n_seeds, const TokenGrid& grid, const PrunerConfig& cfg,
                               std::span<const Strategy> strategies, const CorpusOptions& options) {
    if (n_seeds == 0) {
        throw std::invalid_argument("corpus_experiment needs at least one seed");
    }
    CorpusReport report;
    for (std::size_t k = 0; k < n_seeds; ++k) {
        const std::uint64_t seed = options.first_seed + k;
        const SyntheticScene scene = gen_scene(grid, options.n_objects, seed, options.params);
        for (const Strategy s : strategies) {
            const PruneResult result = run_strategy(scene, s, cfg, seed);
            report.records.push_back(compute_metrics(result, scene, std::string(to_string(s)), seed));
        }
    }
    std::set<std::string> seen;
    for (const Strategy s : strategies) {
        std::string label(to_string(s));
        if (seen.insert(label).second) {
            report.summaries.push_back(summarize(label, report.records));
        }
    }
    return report;
}

std::string metrics_csv(std::span<const MetricsReport> records) {
    std::ostringstream out;
    out << "strategy,seed,edge_tokens,dispersion,redundancy,object_recall\n";
    for (const auto& r : records) {
        out << r.strategy << ',' << r.seed << ',' << r.edge_token_count << ',' << format_number(r.dispersion) << ','
            << format_number(r.redundancy) << ',' << format_number(r.object_recall) << '\n';
    }
    return out.str();
}

std::string summary_csv(std::span<const StrategySummary> summaries) {
    std::ostringstream out;
    out << "strategy,runs,metric,median,mean\n";
    for (const auto& s : summaries) {
        const std::pair<const char*, const MetricSummary*> rows[] = {{"edge_tokens", &s.edge_tokens},
                                                                     {"dispersion", &s.dispersion},
                                                                     {"redundancy", &s.redundancy},
                                                                     {"object_recall", &s.object_recall}};
        for (const auto& [name, m] : rows) {
            out << s.strategy << ',' << s.runs << ',' << name << ',' << format_number(m->median) << ','
                << format_number(m->mean) << '\n';
        }
    }
    return out.str();
}

std::string render_selection(const PruneResult& result, const TokenGrid& grid, const RenderOptions& options) {
    const double cell = options.cell;
    const double margin = cell / 2.0;
    const double caption = grid.is_video() ? cell : 0.0;
    const double panel_w = static_cast<double>(grid.width()) * cell;
    const double panel_h = static_cast<double>(grid.height()) * cell + caption;
    const double total_w = panel_w + 2.0 * margin;
    const double total_h = static_cast<double>(grid.frames()) * (panel_h + margin) + margin;

    const std::size_t n = grid.token_count();
    std::vector<const TraceEntry*> entry(n, nullptr);
    for (const auto& e : result.trace.entries) {
        entry.at(e.index) = &e;
    }
    // Owner rank in trace order, for cluster tints.
    std::vector<long> tint(n, -1);
    if (options.tint_clusters) {
        for (std::size_t k = 0; k < result.trace.size(); ++k) {
            const auto it = result.clusters.find(result.trace.entries[k].index);
            if (it == result.clusters.end()) {
                continue;
            }
            for (const std::size_t u : it->second) {
                tint.at(u) = static_cast<long>(k);
            }
        }
    }

    char buf[512];
    std::ostringstream svg;
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f "
                  "%.0f\">\n",
                  total_w, total_h, total_w, total_h);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << buf;
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (std::size_t t = 0; t < grid.frames(); ++t) {
        const double top = margin + static_cast<double>(t) * (panel_h + margin);
        svg << "<g id=\"frame-" << t << "\">\n";
        if (grid.is_video()) {
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"%.1f\">frame "
                          "%zu</text>\n",
                          margin, top + caption * 0.7, cell * 0.5, t);
            svg << buf;
        }
        for (std::size_t y = 0; y < grid.height(); ++y) {
            for (std::size_t x = 0; x < grid.width(); ++x) {
                const std::size_t i = index_of({x, y, t}, grid);
                const double px = margin + static_cast<double>(x) * cell;
                const double py = top + caption + static_cast<double>(y) * cell;
                std::string fill = "#ffffff";
                if (entry[i] != nullptr) {
                    switch (entry[i]->stage) {
                        case Stage::pivot:
                            fill = "#d62728";
                            break;
                        case Stage::greedy:
                            fill = "#2ca02c";
                            break;
                        case Stage::sampled:
                            fill = "#1f77b4";
                            break;
                    }
                } else if (tint[i] >= 0) {
                    const long hue = (tint[i] * 137) % 360;
                    std::snprintf(buf, sizeof(buf), "hsl(%ld,60%%,88%%)", hue);
                    fill = buf;
                }
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"%s\" "
                              "stroke=\"#999999\" stroke-width=\"0.5\"/>\n",
                              px, py, cell, cell, fill.c_str());
                svg << buf;
                if (entry[i] != nullptr) {
                    std::snprintf(buf, sizeof(buf),
                                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"%.1f\" "
                                  "fill=\"#ffffff\" text-anchor=\"middle\" dominant-baseline=\"central\">%zu</text>\n",
                                  px + cell / 2.0, py + cell / 2.0, cell * 0.4, entry[i]->order);
                    svg << buf;
                }
            }
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace ctp::harness
