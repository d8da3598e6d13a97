// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "ctp/core.hpp"
#include "ctp/similarity.hpp"

namespace ctp {

inline constexpr std::size_t kNoOwner = std::numeric_limits<std::size_t>::max();

struct ClusterAssignment {
    /// owner[u] is the retained token discarded token u merges into; kNoOwner for retained tokens.
    std::vector<std::size_t> owner;
    /// Retained token -> its discarded members in ascending order. Every retained token is a key.
    ClusterMap members;
};

/// Maps every discarded token to the retained token of highest raw similarity
/// (ties: lowest retained index).
ClusterAssignment assign_clusters(const SelectionTrace& trace, const SimilarityMatrix& sim);

struct SwaOptions {
    double blend = 0.3;  ///< beta: share of the retained token's own state
    double eps = 1e-8;
    bool raw_weights = false;  ///< signed similarities as weights; default clamps at zero
};

/// Similarity-weighted aggregation. Row k of the result belongs to trace entry k:
///   w_u = max(M_uj, 0), alpha_u = w_u / (sum w + eps), E_j = sum alpha_u H_u,
///   H_j' = beta H_j + (1 - beta) E_j.
/// Retained tokens with no members are copied unchanged.
Matrix swa_update(const Matrix& hidden, const SelectionTrace& trace, const ClusterAssignment& assignment,
                  const SimilarityMatrix& sim, const SwaOptions& options);

/// Normalized weights alpha_u for the members of `owner`'s cluster, in member order.
std::vector<double> cluster_weights(std::size_t owner, const ClusterAssignment& assignment,
                                    const SimilarityMatrix& sim, const SwaOptions& options);

}  // namespace ctp
