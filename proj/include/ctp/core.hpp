// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctp/errors.hpp"
#include "ctp/matrix.hpp"

namespace ctp {

inline constexpr std::string_view kEngineVersion = "0.1.0";

/// Integer grid position of a token. `t` is the frame, 0 for images.
struct Coord {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t t = 0;

    bool operator==(const Coord&) const = default;
};

/// Spatial layout of the visual tokens: `frames` stacked H x W grids, frame-major.
class TokenGrid {
public:
    TokenGrid() = default;
    TokenGrid(std::size_t height, std::size_t width, std::size_t frames = 1);

    std::size_t height() const { return m_height; }
    std::size_t width() const { return m_width; }
    std::size_t frames() const { return m_frames; }
    std::size_t token_count() const { return m_height * m_width * m_frames; }
    bool is_video() const { return m_frames > 1; }

    bool operator==(const TokenGrid&) const = default;

private:
    std::size_t m_height = 1;
    std::size_t m_width = 1;
    std::size_t m_frames = 1;
};

Coord coords_of(std::size_t index, const TokenGrid& grid);
std::size_t index_of(const Coord& coord, const TokenGrid& grid);

/// Euclidean distance between the grid positions of two tokens.
double spatial_distance(std::size_t i, std::size_t j, const TokenGrid& grid);

/// Normalizer for spatial distances: sqrt(H^2 + W^2), plus T^2 for video grids.
double d_max(const TokenGrid& grid);

/// Hidden states (N x d) and keys (N x d_k) for one pruning instance.
struct FeatureSet {
    Matrix hidden;
    Matrix keys;
};

/// Entries are not finite.
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ShapeError when row counts disagree with the grid, DataError on NaN/Inf.
void validate_features(const FeatureSet& features, const TokenGrid& grid);

struct PrunerConfig {
    std::size_t retain = 0;  ///< R, caller-supplied
    std::size_t pivots = 4;  ///< kappa
    std::size_t channels = 256;  ///< q
    double bss_strength = 0.5;  ///< lambda
    double tau0 = 0.8;
    double dtau = 0.1;
    std::size_t batch = 16;
    double blend = 0.3;  ///< beta
    double eps = 1e-8;
    /// Use signed similarities as aggregation weights instead of clamping at zero.
    bool raw_swa_weights = false;

    bool operator==(const PrunerConfig&) const = default;
};

/// Config as requested, as clamped to the instance, and the names of clamped fields.
struct EffectiveConfig {
    PrunerConfig requested;
    PrunerConfig effective;
    std::vector<std::string> clamped;

    bool operator==(const EffectiveConfig&) const = default;
};

/// Range-checks every field (throws ConfigError naming all violations), then clamps
/// pivots to min(pivots, retain, N), channels to min(channels, d) and retain to min(retain, N).
EffectiveConfig validate_config(const PrunerConfig& cfg, const TokenGrid& grid, const FeatureSet& features);
EffectiveConfig validate_config(const PrunerConfig& cfg, std::size_t token_count, std::size_t hidden_dim);

enum class Stage : std::uint8_t { pivot, greedy, sampled };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view text);

struct TraceEntry {
    std::size_t index = 0;
    std::size_t order = 0;  ///< 1-based
    Stage stage = Stage::pivot;
    int loop = -1;  ///< -1 for pivots
    std::optional<double> tau_at_accept;

    bool operator==(const TraceEntry&) const = default;
};

struct SelectionTrace {
    std::vector<TraceEntry> entries;

    std::size_t size() const { return entries.size(); }
    std::vector<std::size_t> indices() const;
    void append(std::size_t index, Stage stage, int loop, std::optional<double> tau);

    bool operator==(const SelectionTrace&) const = default;
};

/// Retained token -> discarded tokens merged into it. Every retained token has a key.
using ClusterMap = std::map<std::size_t, std::vector<std::size_t>>;

struct PruneResult {
    TokenGrid grid;
    SelectionTrace trace;
    ClusterMap clusters;
    Matrix updated_hidden;  ///< |trace| x d, rows in trace order
    EffectiveConfig config;
};

}  // namespace ctp
