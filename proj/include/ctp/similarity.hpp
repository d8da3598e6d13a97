// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "ctp/core.hpp"

namespace ctp {

/// Dense N x N buffers are refused above this token count (8192 tokens is 512 MB of doubles).
inline constexpr std::size_t kDefaultMaxTokens = 8192;

/// Rows whose L2 norm falls below this are treated as zero vectors by cosine_matrix.
inline constexpr double kZeroNorm = 1e-12;

/// Hidden states restricted to the highest-variance channels.
struct ReducedFeatures {
    Matrix matrix;  ///< N x q, columns in ascending channel_ids order
    std::vector<std::size_t> channel_ids;  ///< ascending
};

/// Cosine similarity of every token pair. Symmetric, unit diagonal, entries clamped to [-1, 1].
struct SimilarityMatrix {
    Matrix values;

    std::size_t size() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

/// All-pairs grid distances plus the normalizer d_max.
struct DistanceMatrix {
    Matrix values;
    double dmax = 1.0;

    std::size_t size() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

/// Population variance (divisor N) of every column, accumulated in row order.
std::vector<double> channel_variances(const Matrix& hidden);

/// Keeps the q largest-variance columns; ties prefer the lower column index.
ReducedFeatures screen_channels(const Matrix& hidden, std::size_t q);

SimilarityMatrix cosine_matrix(const ReducedFeatures& reduced, std::size_t max_tokens = kDefaultMaxTokens);

DistanceMatrix distance_matrix(const TokenGrid& grid, std::size_t max_tokens = kDefaultMaxTokens);

}  // namespace ctp
