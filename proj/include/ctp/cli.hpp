// Copyright (C) 2026 The ctprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ctp/core.hpp"

namespace ctp::cli {

/// Process exit codes. Part of the command-line contract.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,  ///< I/O and other runtime errors
    kShapeMismatch = 2,
    kMalformedTensor = 3,
    kInvalidConfig = 4,
    kUsage = 5,
};

/// Parses "HxW" or "HxWxT".
TokenGrid parse_grid(const std::string& text);

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctp::cli
