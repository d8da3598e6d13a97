// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "ctp/core.hpp"
#include "ctp/harness.hpp"

namespace ctp::io {

/// Everything in a PruneResult except the updated hidden states, which travel as a tensor file.
struct ResultDocument {
    std::string engine_version{kEngineVersion};
    TokenGrid grid;
    EffectiveConfig config;
    SelectionTrace trace;
    ClusterMap clusters;
    std::optional<harness::MetricsReport> metrics;

    bool operator==(const ResultDocument&) const = default;
};

class ResultParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ResultDocument make_document(const PruneResult& result, std::optional<harness::MetricsReport> metrics = {});

/// Ordered-key JSON, two-space indent, trailing newline. Clusters are listed in trace order.
std::string serialize_result(const ResultDocument& doc);

/// Throws ResultParseError on malformed input.
ResultDocument parse_result(const std::string& text);

}  // namespace ctp::io
