// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/core.hpp"

namespace ctp::harness {

/// Dimensions of generated features. The distribution constants are fixed in harness.cpp.
struct SceneParams {
    std::size_t hidden_dim = 4096;
    std::size_t key_dim = 128;

    bool operator==(const SceneParams&) const = default;
};

/// Token field with planted objects over a smoothly varying, noisier background.
struct SyntheticScene {
    TokenGrid grid;
    FeatureSet features;
    std::vector<std::vector<std::size_t>> object_masks;  ///< ascending token ids per object
    std::vector<std::size_t> background_ids;  ///< ascending
    std::uint64_t seed = 0;
    SceneParams params;
};

/// Deterministic in (grid, n_objects, seed, params). Throws GenerationError when the blobs
/// cannot be placed without overlap.
SyntheticScene gen_scene(const TokenGrid& grid, std::size_t n_objects, std::uint64_t seed,
                         const SceneParams& params = {});

enum class Strategy { bss, redundancy_only, random };

std::string_view to_string(Strategy strategy);
/// Throws std::invalid_argument on an unknown label.
Strategy parse_strategy(std::string_view label);

/// bss: the full pipeline; redundancy_only: the pipeline with bss_strength forced to 0;
/// random: R tokens drawn uniformly without replacement using `seed`, then merged as usual.
PruneResult run_strategy(const SyntheticScene& scene, Strategy strategy, const PrunerConfig& cfg,
                         std::uint64_t seed);

struct MetricsReport {
    std::size_t edge_token_count = 0;
    double dispersion = 0.0;  ///< mean distance to the nearest other selected token; 0 for one token
    double redundancy = 0.0;  ///< mean over selected tokens of the max similarity to the rest of the selection
    double object_recall = 0.0;  ///< object tokens within the recall radius of a selected token
    std::string strategy;
    std::uint64_t seed = 0;

    bool operator==(const MetricsReport&) const = default;
};

/// Chebyshev radius used by object_recall.
inline constexpr std::size_t kRecallRadius = 1;

MetricsReport compute_metrics(const PruneResult& result, const SyntheticScene& scene, std::string strategy = "",
                              std::uint64_t seed = 0, std::size_t recall_radius = kRecallRadius);

struct MetricSummary {
    double median = 0.0;
    double mean = 0.0;
};

struct StrategySummary {
    std::string strategy;
    std::size_t runs = 0;
    MetricSummary edge_tokens;
    MetricSummary dispersion;
    MetricSummary redundancy;
    MetricSummary object_recall;
};

struct CorpusReport {
    std::vector<MetricsReport> records;  ///< seed-major, strategies in request order
    std::vector<StrategySummary> summaries;
};

struct CorpusOptions {
    std::size_t n_objects = 3;
    std::uint64_t first_seed = 0;
    SceneParams params;
};

/// One scene per seed first_seed .. first_seed + n_seeds - 1, every strategy run on each.
CorpusReport corpus_experiment(std::size_t n_seeds, const TokenGrid& grid, const PrunerConfig& cfg,
                               std::span<const Strategy> strategies, const CorpusOptions& options = {});

StrategySummary summarize(std::string strategy, std::span<const MetricsReport> records);

/// Header `strategy,seed,edge_tokens,dispersion,redundancy,object_recall`, one line per record.
std::string metrics_csv(std::span<const MetricsReport> records);
std::string summary_csv(std::span<const StrategySummary> summaries);

struct RenderOptions {
    bool tint_clusters = true;
    double cell = 28.0;  ///< cell edge in user units
};

/// SVG picture of the grid; selected cells are colored by stage and labeled with their
/// selection order. Video grids render one panel per frame, stacked vertically.
std::string render_selection(const PruneResult& result, const TokenGrid& grid, const RenderOptions& options = {});

}  // namespace ctp::harness
