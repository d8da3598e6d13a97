// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ctp/similarity.hpp"
#include "test_util.hpp"

using namespace ctp;
using ctp::testing::random_matrix;

namespace {

double naive_cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace

TEST(ChannelVariances, Examples) {
    // Columns: constant, [0, 2], [0, 4] -> population variances 0, 1, 4.
    const Matrix h(2, 3, {5.0, 0.0, 0.0, 5.0, 2.0, 4.0});
    const auto v = channel_variances(h);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_DOUBLE_EQ(v[0], 0.0);
    EXPECT_DOUBLE_EQ(v[1], 1.0);
    EXPECT_DOUBLE_EQ(v[2], 4.0);
}

TEST(ChannelVariances, SingleTokenIsAllZero) {
    const Matrix h(1, 4, {1.0, -2.0, 3.0, 9.0});
    for (const double v : channel_variances(h)) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(ScreenChannels, FullWidthIsIdentity) {
    Rng rng(3);
    const Matrix h = random_matrix(rng, 10, 6);
    const auto r = screen_channels(h, 6);
    EXPECT_EQ(r.matrix, h);
    EXPECT_EQ(r.channel_ids, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(screen_channels(h, 99).matrix, h);
}

TEST(ScreenChannels, KeepsTopVarianceOfWideInput) {
    // Column c alternates +a_c / -a_c over 8 rows, so its variance is exactly a_c^2.
    const std::size_t d = 4096;
    std::vector<double> amp(d);
    std::iota(amp.begin(), amp.end(), 1.0);
    Rng rng(11);
    for (std::size_t k = d - 1; k > 0; --k) {
        std::swap(amp[k], amp[rng.below(k + 1)]);
    }
    Matrix h(8, d);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            h(i, c) = (i % 2 == 0 ? 1.0 : -1.0) * amp[c];
        }
    }
    std::vector<std::size_t> expected;
    for (std::size_t c = 0; c < d; ++c) {
        if (amp[c] > static_cast<double>(d - 256)) {
            expected.push_back(c);
        }
    }
    const auto r = screen_channels(h, 256);
    EXPECT_EQ(r.channel_ids, expected);
    ASSERT_EQ(r.matrix.cols(), 256u);
    for (std::size_t k = 0; k < 256; ++k) {
        EXPECT_EQ(r.matrix(3, k), h(3, expected[k]));
    }
}

TEST(ScreenChannels, TiesPreferLowerIndex) {
    // Columns 1 and 2 share the largest variance.
    const Matrix h(2, 3, {0.0, 0.0, 0.0, 1.0, 2.0, 2.0});
    EXPECT_EQ(screen_channels(h, 1).channel_ids, std::vector<std::size_t>{1});
    EXPECT_EQ(screen_channels(h, 2).channel_ids, (std::vector<std::size_t>{1, 2}));
}

TEST(ScreenChannels, ColumnPermutationPermutesIds) {
    Rng rng(5);
    const std::size_t d = 20;
    const Matrix h = random_matrix(rng, 15, d);
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = d - 1; k > 0; --k) {
        std::swap(perm[k], perm[rng.below(k + 1)]);
    }
    // permuted column c holds original column perm[c]
    Matrix hp(15, d);
    for (std::size_t i = 0; i < 15; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
            hp(i, c) = h(i, perm[c]);
        }
    }
    const auto a = screen_channels(h, 7);
    const auto b = screen_channels(hp, 7);
    std::set<std::size_t> mapped;
    for (const std::size_t c : b.channel_ids) {
        mapped.insert(perm[c]);
    }
    EXPECT_EQ(mapped, std::set<std::size_t>(a.channel_ids.begin(), a.channel_ids.end()));

    const auto column = [](const Matrix& m, std::size_t c) {
        std::vector<double> v;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            v.push_back(m(i, c));
        }
        return v;
    };
    std::multiset<std::vector<double>> ca;
    std::multiset<std::vector<double>> cb;
    for (std::size_t k = 0; k < 7; ++k) {
        ca.insert(column(a.matrix, k));
        cb.insert(column(b.matrix, k));
    }
    EXPECT_EQ(ca, cb);
}

TEST(CosineMatrix, Examples) {
    ReducedFeatures r{Matrix(4, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0}), {0, 1}};
    const auto m = cosine_matrix(r);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(m(i, i), 1.0);
    }
    EXPECT_EQ(m(0, 1), 0.0);
    EXPECT_NEAR(m(2, 3), 1.0, 1e-15);
    EXPECT_NEAR(m(0, 2), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(CosineMatrix, ZeroRowConvention) {
    ReducedFeatures r{Matrix(3, 2, {0.0, 0.0, 1.0, 2.0, -3.0, 1.0}), {0, 1}};
    const auto m = cosine_matrix(r);
    EXPECT_EQ(m(0, 0), 1.0);
    EXPECT_EQ(m(0, 1), 0.0);
    EXPECT_EQ(m(2, 0), 0.0);
}

TEST(CosineMatrix, AgreesWithNaiveLoopAndInvariants) {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(32);
        const std::size_t q = 1 + rng.below(16);
        const Matrix x = random_matrix(rng, n, q);
        const auto m = cosine_matrix({x, {}});
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(m(i, i), 1.0, 1e-6);
            for (std::size_t j = 0; j < n; ++j) {
                ASSERT_EQ(m(i, j), m(j, i));
                ASSERT_LE(std::abs(m(i, j)), 1.0 + 1e-6);
                if (i != j) {
                    ASSERT_NEAR(m(i, j), naive_cosine(x.row(i), x.row(j)), 1e-6);
                }
            }
        }
    }
}

TEST(CosineMatrix, RowScaleInvariance) {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(30);
        const std::size_t q = 1 + rng.below(12);
        const Matrix x = random_matrix(rng, n, q);
        Matrix scaled = x;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = rng.uniform(0.01, 100.0);
            for (auto& v : scaled.row(i)) {
                v *= s;
            }
        }
        const auto a = cosine_matrix({x, {}});
        const auto b = cosine_matrix({scaled, {}});
        for (std::size_t k = 0; k < n * n; ++k) {
            ASSERT_NEAR(a.values.data()[k], b.values.data()[k], 1e-6);
        }
    }
}

TEST(CosineMatrix, RespectsTokenCap) {
    ReducedFeatures r{Matrix(10, 2, 1.0), {0, 1}};
    EXPECT_THROW(cosine_matrix(r, 9), ResourceError);
    EXPECT_NO_THROW(cosine_matrix(r, 10));
}

TEST(DistanceMatrix, Examples) {
    const auto d12 = distance_matrix(TokenGrid(1, 2));
    EXPECT_EQ(d12.values, Matrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
    EXPECT_DOUBLE_EQ(d12.dmax, std::sqrt(5.0));

    const auto d1 = distance_matrix(TokenGrid(1, 1));
    EXPECT_EQ(d1.values, Matrix(1, 1, {0.0}));
    EXPECT_DOUBLE_EQ(d1.dmax, std::sqrt(2.0));

    const TokenGrid g(24, 24);
    const auto d24 = distance_matrix(g);
    EXPECT_EQ(d24.size(), 576u);
    EXPECT_DOUBLE_EQ(d24.dmax, 24.0 * std::sqrt(2.0));
    double biggest = 0.0;
    for (std::size_t i = 0; i < 576; ++i) {
        EXPECT_EQ(d24(i, i), 0.0);
        for (std::size_t j = 0; j < 576; ++j) {
            ASSERT_EQ(d24(i, j), d24(j, i));
            ASSERT_EQ(d24(i, j), spatial_distance(i, j, g));
            biggest = std::max(biggest, d24(i, j));
        }
    }
    EXPECT_LE(biggest, d24.dmax);
}

TEST(DistanceMatrix, RespectsTokenCap) {
    EXPECT_THROW(distance_matrix(TokenGrid(100, 100), kDefaultMaxTokens), ResourceError);
    EXPECT_THROW(distance_matrix(TokenGrid(4, 4), 15), ResourceError);
}
