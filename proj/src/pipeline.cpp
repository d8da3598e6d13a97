// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/pipeline.hpp"

#include <chrono>

#include "ctp/recovery.hpp"
#include "ctp/selection.hpp"
#include "ctp/similarity.hpp"

namespace ctp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

PruneResult prune(const FeatureSet& features, const TokenGrid& grid, const PrunerConfig& cfg,
                  StageTimings* timings) {
    validate_features(features, grid);
    PruneResult result;
    result.grid = grid;
    result.config = validate_config(cfg, grid, features);
    const PrunerConfig& eff = result.config.effective;

    StageTimings local;
    auto start = Clock::now();
    const ReducedFeatures reduced = screen_channels(features.hidden, eff.channels);
    local.screening = seconds_since(start);

    start = Clock::now();
    const SimilarityMatrix sim = cosine_matrix(reduced);
    local.similarity = seconds_since(start);

    start = Clock::now();
    const auto pivots = init_pivots(features.keys, eff.pivots);
    const DistanceMatrix dist = distance_matrix(grid);
    result.trace = greedy_select(sim, dist, pivots, eff);
    local.selection = seconds_since(start);

    start = Clock::now();
    ClusterAssignment assignment = assign_clusters(result.trace, sim);
    result.updated_hidden =
        swa_update(features.hidden, result.trace, assignment, sim, {eff.blend, eff.eps, eff.raw_swa_weights});
    result.clusters = std::move(assignment.members);
    local.recovery = seconds_since(start);

    if (timings != nullptr) {
        *timings = local;
    }
    return result;
}

}  // namespace ctp
