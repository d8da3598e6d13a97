// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ctp {

/// Token index outside [0, N).
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Matrix dimensions disagree with the grid or with each other.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One or more configuration fields are out of range. `fields()` names each offender.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::vector<std::string> fields, const std::string& message)
        : std::invalid_argument(message), m_fields(std::move(fields)) {}

    const std::vector<std::string>& fields() const { return m_fields; }

private:
    std::vector<std::string> m_fields;
};

/// A dense N x N buffer would exceed the configured token cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Synthetic scene placement failed.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ctp
