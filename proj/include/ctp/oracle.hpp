// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

#include "ctp/core.hpp"

/// Brute-force reference pipeline. Shares nothing with the optimized path except the
/// core types and config validation: similarities and distances are recomputed at every
/// use, and no incremental state is kept. Single-threaded, O(N^3 q) in the worst case.
namespace ctp::oracle {

PruneResult reference_prune(const FeatureSet& features, const TokenGrid& grid, const PrunerConfig& cfg);

/// Full N x N cosine matrix over the q highest-variance channels, by direct double loop.
Matrix reference_similarity(const Matrix& hidden, std::size_t q);

/// Full N x N grid distance matrix, by direct double loop.
Matrix reference_distances(const TokenGrid& grid);

/// Sum over unselected tokens of (1 - max_{j in S} M~_ij). Diagnostic only.
double objective_novelty(const SelectionTrace& trace, const Matrix& sim, const Matrix& dist, double dmax,
                         double lambda);

/// Sum over unselected tokens of min_{j in S} M~_ij, the max-diversity objective read
/// literally. Diagnostic only; nothing optimizes it directly.
double objective_literal(const SelectionTrace& trace, const Matrix& sim, const Matrix& dist, double dmax,
                         double lambda);

}  // namespace ctp::oracle
