// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ctp/core.hpp"

namespace ctp {

/// Wall time spent in each stage of one prune() call, in seconds.
struct StageTimings {
    double screening = 0.0;
    double similarity = 0.0;
    double selection = 0.0;  ///< pivots, distance table and greedy loop
    double recovery = 0.0;
};

/// Full pipeline: channel screening, cosine similarity, pivot seeding, BSS greedy
/// selection and similarity-weighted recovery.
///
/// Throws ShapeError / DataError on inconsistent features and ConfigError on bad config.
PruneResult prune(const FeatureSet& features, const TokenGrid& grid, const PrunerConfig& cfg,
                  StageTimings* timings = nullptr);

}  // namespace ctp
