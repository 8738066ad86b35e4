// Copyright 2026 The cavread Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cavread/config.hpp"

namespace cavread {

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::string summary;  // short human-readable line(s) for the terminal
};

// Each command writes its outputs below config.out_dir. Numerical failures
// surface as SolverError or std::domain_error.
CommandResult cmd_spectrum(const RunConfig& config);
CommandResult cmd_trace(const RunConfig& config);
CommandResult cmd_pmf(const RunConfig& config);
CommandResult cmd_errors(const RunConfig& config);
CommandResult cmd_optimize(const RunConfig& config);
CommandResult cmd_prepare(const RunConfig& config);

/// Dispatches by subcommand name; throws std::invalid_argument when unknown.
CommandResult run_command(const std::string& name, const RunConfig& config);

}  // namespace cavread
