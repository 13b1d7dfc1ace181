// Copyright 2026 The panops Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "CLI11.hpp"

namespace panops::cli {

/// Adds every subcommand to `app`. Each subcommand runs from its parse callback.
void register_commands(CLI::App& app);

}  // namespace panops::cli
