// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctp {

namespace {

void check_cap(std::size_t n, std::size_t max_tokens) {
    if (n > max_tokens) {
        throw ResourceError("dense " + std::to_string(n) + "x" + std::to_string(n) + " matrix exceeds the cap of " +
                            std::to_string(max_tokens) + " tokens");
    }
}

}  // namespace

std::vector<double> channel_variances(const Matrix& hidden) {
    const std::size_t n = hidden.rows();
    const std::size_t d = hidden.cols();
    std::vector<double> mean(d, 0.0);
    if (n == 0) {
        return mean;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = hidden.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            mean[c] += row[c];
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(n);
    }
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = hidden.row(i);
        for (std::size_t c = 0; c < d; ++c) {
            const double dev = row[c] - mean[c];
            var[c] += dev * dev;
        }
    }
    for (auto& v : var) {
        v /= static_cast<double>(n);
    }
    return var;
}

ReducedFeatures screen_channels(const Matrix& hidden, std::size_t q) {
    const std::size_t d = hidden.cols();
    q = std::min(q, d);
    const auto var = channel_variances(hidden);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q), order.end(),
                      [&](std::size_t a, std::size_t b) { return var[a] > var[b] || (var[a] == var[b] && a < b); });
    order.resize(q);
    std::sort(order.begin(), order.end());

    ReducedFeatures out{Matrix(hidden.rows(), q), std::move(order)};
    for (std::size_t i = 0; i < hidden.rows(); ++i) {
        const auto src = hidden.row(i);
        auto dst = out.matrix.row(i);
        for (std::size_t k = 0; k < q; ++k) {
            dst[k] = src[out.channel_ids[k]];
        }
    }
    return out;
}

SimilarityMatrix cosine_matrix(const ReducedFeatures& reduced, std::size_t max_tokens) {
    const Matrix& x = reduced.matrix;
    const std::size_t n = x.rows();
    const std::size_t q = x.cols();
    check_cap(n, max_tokens);

    std::vector<double> norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const double v : x.row(i)) {
            acc += v * v;
        }
        norm[i] = std::sqrt(acc);
    }

    // Channel-major copy so each row of dot products is a run of axpy updates over
    // contiguous memory; every (i, j) still accumulates over channels in ascending order.
    Matrix xt(q, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < q; ++k) {
            xt(k, i) = x(i, k);
        }
    }

    SimilarityMatrix sim{Matrix(n, n)};
    std::vector<double> dots(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Upper triangle only: columns j >= i.
        const std::size_t width = n - i;
        std::fill_n(dots.begin(), width, 0.0);
        double* acc = dots.data();
        for (std::size_t k = 0; k < q; ++k) {
            const double a = x(i, k);
            const double* col = xt.row(k).data() + i;
            for (std::size_t j = 0; j < width; ++j) {
                acc[j] += a * col[j];
            }
        }
        sim.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double m = 0.0;
            if (norm[i] >= kZeroNorm && norm[j] >= kZeroNorm) {
                m = std::clamp(dots[j - i] / (norm[i] * norm[j]), -1.0, 1.0);
            }
            sim.values(i, j) = m;
            sim.values(j, i) = m;
        }
    }
    return sim;
}

DistanceMatrix distance_matrix(const TokenGrid& grid, std::size_t max_tokens) {
    const std::size_t n = grid.token_count();
    check_cap(n, max_tokens);
    std::vector<Coord> coords(n);
    for (std::size_t i = 0; i < n; ++i) {
        coords[i] = coords_of(i, grid);
    }
    DistanceMatrix out{Matrix(n, n), d_max(grid)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto dx = static_cast<std::int64_t>(coords[i].x) - static_cast<std::int64_t>(coords[j].x);
            const auto dy = static_cast<std::int64_t>(coords[i].y) - static_cast<std::int64_t>(coords[j].y);
            const auto dt = static_cast<std::int64_t>(coords[i].t) - static_cast<std::int64_t>(coords[j].t);
            const double dist = std::sqrt(static_cast<double>(dx * dx + dy * dy + dt * dt));
            out.values(i, j) = dist;
            out.values(j, i) = dist;
        }
    }
    return out;
}

}  // namespace ctp
