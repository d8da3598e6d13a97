// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctp/oracle.hpp"
#include "ctp/pipeline.hpp"
#include "ctp/selection.hpp"
#include "ctp/similarity.hpp"
#include "test_util.hpp"

using namespace ctp;
using ctp::testing::random_instance;
using ctp::testing::random_matrix;

namespace {

void expect_same_result(const PruneResult& a, const PruneResult& b) {
    ASSERT_EQ(a.trace.entries, b.trace.entries);
    ASSERT_EQ(a.clusters, b.clusters);
    ASSERT_EQ(a.config, b.config);
    ASSERT_EQ(a.updated_hidden.rows(), b.updated_hidden.rows());
    ASSERT_EQ(a.updated_hidden.cols(), b.updated_hidden.cols());
    for (std::size_t k = 0; k < a.updated_hidden.data().size(); ++k) {
        ASSERT_NEAR(a.updated_hidden.data()[k], b.updated_hidden.data()[k], 1e-9);
    }
}

// Selection written straight from the definitions: no caches, every quantity recomputed.
std::vector<std::size_t> literal_greedy(const Matrix& m, const Matrix& d, double dmax,
                                        std::vector<std::size_t> s, const PrunerConfig& cfg) {
    const std::size_t n = m.rows();
    const auto in_s = [&](std::size_t i) { return std::find(s.begin(), s.end(), i) != s.end(); };
    const auto worst = [&](std::size_t i, const std::vector<std::size_t>& sel) {
        double delta = std::numeric_limits<double>::infinity();
        for (const std::size_t j : sel) delta = std::min(delta, d(i, j));
        double best = -std::numeric_limits<double>::infinity();
        for (const std::size_t j : sel) best = std::max(best, m(i, j) * (1.0 + cfg.bss_strength * (delta / dmax)));
        return best;
    };
    double tau = cfg.tau0;
    while (s.size() < cfg.retain) {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_s(i)) order.push_back({-(1.0 - worst(i, s)), i});
        std::sort(order.begin(), order.end());
        for (std::size_t b = 0; b < order.size() && s.size() < cfg.retain; b += cfg.batch) {
            const auto snapshot = s;
            for (std::size_t k = b; k < std::min(b + cfg.batch, order.size()) && s.size() < cfg.retain; ++k)
                if (worst(order[k].second, snapshot) < tau) s.push_back(order[k].second);
        }
        tau += cfg.dtau;
    }
    return s;
}

}  // namespace

TEST(Oracle, SimilarityAndDistancesAgree) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = random_instance(rng, 1, 100);
        const std::size_t q = 1 + rng.below(inst.features.hidden.cols());
        const auto fast = cosine_matrix(screen_channels(inst.features.hidden, q));
        const auto slow = oracle::reference_similarity(inst.features.hidden, q);
        ASSERT_EQ(fast.values, slow);
        ASSERT_EQ(distance_matrix(inst.grid).values, oracle::reference_distances(inst.grid));
    }
}

TEST(Oracle, PipelineMatchesReferenceOnRandomInstances) {
    Rng rng(2026);
    for (int trial = 0; trial < 250; ++trial) {
        const auto inst = random_instance(rng, 4, 100);
        SCOPED_TRACE(trial);
        expect_same_result(prune(inst.features, inst.grid, inst.cfg),
                           oracle::reference_prune(inst.features, inst.grid, inst.cfg));
    }
}

TEST(Oracle, LiteralGreedyAgreesOnSmallInstances) {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const auto inst = random_instance(rng, 2, 16);
        const auto eff = validate_config(inst.cfg, inst.grid, inst.features).effective;
        if (eff.retain == inst.grid.token_count()) {
            continue;
        }
        const Matrix m = oracle::reference_similarity(inst.features.hidden, eff.channels);
        const Matrix d = oracle::reference_distances(inst.grid);
        const auto pivots = init_pivots(inst.features.keys, eff.pivots);
        const auto expected = literal_greedy(m, d, d_max(inst.grid), pivots, eff);
        ASSERT_EQ(prune(inst.features, inst.grid, inst.cfg).trace.indices(), expected) << "trial " << trial;
    }
}

TEST(Oracle, FullRetentionIsNoOp) {
    Rng rng(8);
    const TokenGrid grid(3, 4);
    const FeatureSet f{random_matrix(rng, 12, 5), random_matrix(rng, 12, 3)};
    PrunerConfig cfg;
    cfg.retain = 12;
    for (const auto& res : {prune(f, grid, cfg), oracle::reference_prune(f, grid, cfg)}) {
        ASSERT_EQ(res.trace.size(), 12u);
        auto idx = res.trace.indices();
        std::sort(idx.begin(), idx.end());
        for (std::size_t i = 0; i < 12; ++i) {
            EXPECT_EQ(idx[i], i);
        }
        for (const auto& [j, members] : res.clusters) {
            EXPECT_TRUE(members.empty());
        }
        for (std::size_t k = 0; k < 12; ++k) {
            for (std::size_t c = 0; c < 5; ++c) {
                EXPECT_EQ(res.updated_hidden(k, c), f.hidden(res.trace.entries[k].index, c));
            }
        }
    }
}

TEST(Oracle, SingleTokenBudgetKeepsLargestKey) {
    const TokenGrid grid(2, 2);
    const FeatureSet f{Matrix(4, 2, {1.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0, 0.5}),
                       Matrix(4, 1, {0.5, -3.0, 1.0, 2.0})};
    PrunerConfig cfg;
    cfg.retain = 1;
    cfg.pivots = 1;
    const auto res = oracle::reference_prune(f, grid, cfg);
    ASSERT_EQ(res.trace.indices(), std::vector<std::size_t>{1});
    EXPECT_EQ(res.clusters.at(1), (std::vector<std::size_t>{0, 2, 3}));
    expect_same_result(prune(f, grid, cfg), res);
}

TEST(Oracle, ObjectiveExamples) {
    const Matrix sim(3, 3, {1.0, 0.5, -0.2, 0.5, 1.0, 0.3, -0.2, 0.3, 1.0});
    const Matrix dist(3, 3, {0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0});
    SelectionTrace s;
    s.append(0, Stage::pivot, -1, std::nullopt);
    EXPECT_NEAR(oracle::objective_novelty(s, sim, dist, 4.0, 0.0), 0.5 + 1.2, 1e-15);
    EXPECT_NEAR(oracle::objective_literal(s, sim, dist, 4.0, 0.0), 0.5 - 0.2, 1e-15);
    // lambda = 1: gains 1.25 and 1.5.
    EXPECT_NEAR(oracle::objective_novelty(s, sim, dist, 4.0, 1.0), (1.0 - 0.625) + (1.0 + 0.3), 1e-15);
    s.append(1, Stage::greedy, 0, 0.8);
    EXPECT_NEAR(oracle::objective_novelty(s, sim, dist, 4.0, 0.0), 0.7, 1e-15);
    EXPECT_NEAR(oracle::objective_literal(s, sim, dist, 4.0, 0.0), -0.2, 1e-15);
}
