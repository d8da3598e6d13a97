// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "ctp/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ctp {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : m_rows(rows), m_cols(cols), m_data(std::move(data)) {
    if (m_data.size() != rows * cols) {
        throw ShapeError("matrix buffer holds " + std::to_string(m_data.size()) + " values, expected " +
                         std::to_string(rows * cols));
    }
}

TokenGrid::TokenGrid(std::size_t height, std::size_t width, std::size_t frames)
    : m_height(height), m_width(width), m_frames(frames) {
    if (height == 0 || width == 0 || frames == 0) {
        throw ShapeError("grid dimensions must be positive");
    }
}

Coord coords_of(std::size_t index, const TokenGrid& grid) {
    if (index >= grid.token_count()) {
        throw BoundsError("token index " + std::to_string(index) + " out of range for " +
                          std::to_string(grid.token_count()) + " tokens");
    }
    const std::size_t plane = grid.height() * grid.width();
    const std::size_t within = index % plane;
    return {within % grid.width(), within / grid.width(), index / plane};
}

std::size_t index_of(const Coord& coord, const TokenGrid& grid) {
    if (coord.x >= grid.width() || coord.y >= grid.height() || coord.t >= grid.frames()) {
        throw BoundsError("coordinate outside grid");
    }
    return (coord.t * grid.height() + coord.y) * grid.width() + coord.x;
}

double spatial_distance(std::size_t i, std::size_t j, const TokenGrid& grid) {
    const Coord a = coords_of(i, grid);
    const Coord b = coords_of(j, grid);
    const auto diff = [](std::size_t u, std::size_t v) {
        const auto d = static_cast<std::int64_t>(u) - static_cast<std::int64_t>(v);
        return d * d;
    };
    return std::sqrt(static_cast<double>(diff(a.x, b.x) + diff(a.y, b.y) + diff(a.t, b.t)));
}

double d_max(const TokenGrid& grid) {
    const auto h = static_cast<double>(grid.height());
    const auto w = static_cast<double>(grid.width());
    if (!grid.is_video()) {
        return std::sqrt(h * h + w * w);
    }
    const auto t = static_cast<double>(grid.frames());
    return std::sqrt(h * h + w * w + t * t);
}

void validate_features(const FeatureSet& features, const TokenGrid& grid) {
    const std::size_t n = grid.token_count();
    if (features.hidden.rows() != n || features.keys.rows() != n) {
        std::ostringstream msg;
        msg << "grid " << grid.height() << "x" << grid.width() << "x" << grid.frames() << " has " << n
            << " tokens but hidden has " << features.hidden.rows() << " rows and keys has " << features.keys.rows()
            << " rows";
        throw ShapeError(msg.str());
    }
    if (features.hidden.cols() == 0 || features.keys.cols() == 0) {
        throw ShapeError("hidden and keys must have at least one column");
    }
    const auto finite = [](std::span<const double> values) {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    };
    if (!finite(features.hidden.data())) {
        throw DataError("hidden contains non-finite values");
    }
    if (!finite(features.keys.data())) {
        throw DataError("keys contains non-finite values");
    }
}

EffectiveConfig validate_config(const PrunerConfig& cfg, const TokenGrid& grid, const FeatureSet& features) {
    return validate_config(cfg, grid.token_count(), features.hidden.cols());
}

EffectiveConfig validate_config(const PrunerConfig& cfg, std::size_t token_count, std::size_t hidden_dim) {
    std::vector<std::string> bad;
    std::ostringstream msg;
    const auto reject = [&](const char* field, const char* why) {
        if (!bad.empty()) {
            msg << "; ";
        }
        bad.emplace_back(field);
        msg << field << ": " << why;
    };

    if (cfg.retain == 0) {
        reject("retain", "must be a positive integer");
    }
    if (cfg.pivots == 0) {
        reject("pivots", "must be a positive integer");
    }
    if (cfg.channels == 0) {
        reject("channels", "must be a positive integer");
    }
    const bool lambda_ok = std::isfinite(cfg.bss_strength) && cfg.bss_strength >= 0.0;
    if (!lambda_ok) {
        reject("bss_strength", "must be a finite nonnegative real");
    }
    if (!std::isfinite(cfg.tau0) || cfg.tau0 <= 0.0 || (lambda_ok && cfg.tau0 > 1.0 + cfg.bss_strength)) {
        reject("tau0", "must lie in (0, 1 + bss_strength]");
    }
    if (!std::isfinite(cfg.dtau) || cfg.dtau <= 0.0) {
        reject("dtau", "must be a finite positive real");
    }
    if (cfg.batch == 0) {
        reject("batch", "must be a positive integer");
    }
    if (!std::isfinite(cfg.blend) || cfg.blend <= 0.0 || cfg.blend >= 1.0) {
        reject("blend", "must lie in (0, 1)");
    }
    if (!std::isfinite(cfg.eps) || cfg.eps <= 0.0) {
        reject("eps", "must be a finite positive real");
    }
    if (token_count == 0) {
        reject("retain", "instance has no tokens");
    }
    if (!bad.empty()) {
        throw ConfigError(std::move(bad), "invalid config: " + msg.str());
    }

    EffectiveConfig out{cfg, cfg, {}};
    PrunerConfig& eff = out.effective;
    if (eff.retain > token_count) {
        eff.retain = token_count;
        out.clamped.emplace_back("retain");
    }
    if (eff.pivots > eff.retain) {
        eff.pivots = eff.retain;
        out.clamped.emplace_back("pivots");
    }
    if (hidden_dim > 0 && eff.channels > hidden_dim) {
        eff.channels = hidden_dim;
        out.clamped.emplace_back("channels");
    }
    return out;
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::pivot:
            return "pivot";
        case Stage::greedy:
            return "greedy";
        case Stage::sampled:
            return "sampled";
    }
    return "unknown";
}

Stage stage_from_string(std::string_view text) {
    if (text == "pivot") {
        return Stage::pivot;
    }
    if (text == "greedy") {
        return Stage::greedy;
    }
    if (text == "sampled") {
        return Stage::sampled;
    }
    throw std::invalid_argument("unknown stage label '" + std::string(text) + "'");
}

std::vector<std::size_t> SelectionTrace::indices() const {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.index);
    }
    return out;
}

void SelectionTrace::append(std::size_t index, Stage stage, int loop, std::optional<double> tau) {
    entries.push_back({index, entries.size() + 1, stage, loop, tau});
}

}  // namespace ctp
