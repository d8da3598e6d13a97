// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ctp/core.hpp"
#include "test_util.hpp"

using namespace ctp;

TEST(Coords, ExamplesFromGridLayout) {
    const TokenGrid g24(24, 24);
    EXPECT_EQ(coords_of(0, g24), (Coord{0, 0, 0}));
    EXPECT_EQ(coords_of(25, g24), (Coord{1, 1, 0}));

    const TokenGrid video(13, 14, 2);
    EXPECT_EQ(coords_of(182, video), (Coord{0, 0, 1}));
    EXPECT_EQ(coords_of(183, video), (Coord{1, 0, 1}));
}

TEST(Coords, OutOfRangeThrows) {
    const TokenGrid g(24, 24);
    EXPECT_THROW(coords_of(576, g), BoundsError);
    EXPECT_THROW(spatial_distance(0, 576, g), BoundsError);
    EXPECT_THROW(index_of({24, 0, 0}, g), BoundsError);
}

TEST(Coords, BijectionExhaustive) {
    for (const TokenGrid& g : {TokenGrid(1, 1), TokenGrid(24, 24), TokenGrid(13, 14, 16), TokenGrid(100, 100),
                               TokenGrid(7, 3, 5)}) {
        for (std::size_t i = 0; i < g.token_count(); ++i) {
            ASSERT_EQ(index_of(coords_of(i, g), g), i);
        }
    }
}

TEST(TokenGrid, RejectsZeroDimensions) {
    EXPECT_THROW(TokenGrid(0, 4), ShapeError);
    EXPECT_THROW(TokenGrid(4, 4, 0), ShapeError);
}

TEST(SpatialDistance, Examples) {
    const TokenGrid g(24, 24);
    EXPECT_EQ(spatial_distance(0, 0, g), 0.0);
    EXPECT_EQ(spatial_distance(0, 1, g), 1.0);
    EXPECT_NEAR(spatial_distance(0, 575, g), 23.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(spatial_distance(0, 575, g), 32.5269, 1e-4);
}

TEST(SpatialDistance, MetricAxiomsAndDmaxBound) {
    Rng rng(7);
    for (const TokenGrid& g : {TokenGrid(5, 7), TokenGrid(3, 4, 3), TokenGrid(1, 9)}) {
        const std::size_t n = g.token_count();
        const double bound = d_max(g);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double dij = spatial_distance(i, j, g);
                ASSERT_EQ(dij, spatial_distance(j, i, g));
                ASSERT_EQ(dij == 0.0, i == j);
                ASSERT_LE(dij, bound);
            }
        }
        for (int s = 0; s < 2000; ++s) {
            const std::size_t a = rng.below(n);
            const std::size_t b = rng.below(n);
            const std::size_t c = rng.below(n);
            ASSERT_LE(spatial_distance(a, c, g), spatial_distance(a, b, g) + spatial_distance(b, c, g) + 1e-12);
        }
    }
}

TEST(DMax, Examples) {
    EXPECT_NEAR(d_max(TokenGrid(24, 24)), 24.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(d_max(TokenGrid(24, 24)), 33.9411, 1e-4);
    EXPECT_DOUBLE_EQ(d_max(TokenGrid(1, 1)), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(d_max(TokenGrid(13, 14, 16)), std::sqrt(621.0));
}

TEST(ValidateConfig, ClampsToInstance) {
    PrunerConfig cfg;
    cfg.retain = 2;
    auto eff = validate_config(cfg, 576, 4096);
    EXPECT_EQ(eff.effective.pivots, 2u);
    EXPECT_EQ(eff.clamped, std::vector<std::string>{"pivots"});

    cfg.retain = 64;
    eff = validate_config(cfg, 576, 64);
    EXPECT_EQ(eff.effective.channels, 64u);

    cfg.retain = 700;
    eff = validate_config(cfg, 576, 4096);
    EXPECT_EQ(eff.effective.retain, 576u);
    EXPECT_EQ(eff.requested.retain, 700u);
    EXPECT_NE(std::find(eff.clamped.begin(), eff.clamped.end(), "retain"), eff.clamped.end());
}

TEST(ValidateConfig, PivotsClampToTokenCount) {
    PrunerConfig cfg;
    cfg.retain = 10;
    const auto eff = validate_config(cfg, 3, 8);
    EXPECT_EQ(eff.effective.retain, 3u);
    EXPECT_EQ(eff.effective.pivots, 3u);
}

TEST(ValidateConfig, ReportsEveryViolatedField) {
    PrunerConfig cfg;
    cfg.retain = 0;
    cfg.bss_strength = -1.0;
    cfg.dtau = 0.0;
    cfg.blend = 1.0;
    cfg.eps = std::nan("");
    try {
        validate_config(cfg, 16, 8);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const auto& f = e.fields();
        for (const char* name : {"retain", "bss_strength", "dtau", "blend", "eps"}) {
            EXPECT_NE(std::find(f.begin(), f.end(), name), f.end()) << name;
            EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << name;
        }
    }
}

TEST(ValidateConfig, Tau0RangeDependsOnLambda) {
    PrunerConfig cfg;
    cfg.retain = 4;
    cfg.bss_strength = 0.5;
    cfg.tau0 = 1.5;
    EXPECT_NO_THROW(validate_config(cfg, 16, 8));
    cfg.tau0 = 1.5000001;
    EXPECT_THROW(validate_config(cfg, 16, 8), ConfigError);
    cfg.tau0 = 0.0;
    EXPECT_THROW(validate_config(cfg, 16, 8), ConfigError);
}

TEST(ValidateFeatures, ShapeAndFiniteness) {
    const TokenGrid g(2, 2);
    FeatureSet f{Matrix(4, 3), Matrix(4, 2)};
    EXPECT_NO_THROW(validate_features(f, g));
    f.keys = Matrix(3, 2);
    EXPECT_THROW(validate_features(f, g), ShapeError);
    f.keys = Matrix(4, 2);
    f.hidden(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate_features(f, g), DataError);
}

TEST(SelectionTrace, AppendNumbersFromOne) {
    SelectionTrace t;
    t.append(5, Stage::pivot, -1, std::nullopt);
    t.append(2, Stage::greedy, 0, 0.8);
    EXPECT_EQ(t.entries[0].order, 1u);
    EXPECT_EQ(t.entries[1].order, 2u);
    EXPECT_EQ(t.indices(), (std::vector<std::size_t>{5, 2}));
}

TEST(Stage, LabelsRoundTrip) {
    for (Stage s : {Stage::pivot, Stage::greedy, Stage::sampled}) {
        EXPECT_EQ(stage_from_string(to_string(s)), s);
    }
    EXPECT_THROW(stage_from_string("bogus"), std::invalid_argument);
}
