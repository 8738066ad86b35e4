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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cavread/commands.hpp"
#include "cavread/config.hpp"
#include "cavread/lindblad.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavread: cavity readout simulation and inference"};
  app.require_subcommand(1);
  Options opts;

  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "steady-state transmission and reflection spectrum"},
      {"trace", "simulated quantum-jump count trace"},
      {"pmf", "joint count distributions and threshold decision map"},
      {"errors", "threshold and maximum-likelihood error report"},
      {"optimize", "detection-time scan of the threshold error"},
      {"prepare", "single-atom preparation statistics"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "configuration file")->required();
    sub->add_option("--seed", opts.seed, "master seed (overrides run.master_seed)");
    sub->add_option("--out", opts.out, "output directory (overrides run.out_dir)");
    sub->add_option("--workers", opts.workers, "worker threads (overrides run.worker_count)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  cavread::RunConfig config;
  try {
    config = cavread::RunConfig::load(opts.config_path);
    if (opts.seed) config.master_seed = *opts.seed;
    if (opts.out) config.out_dir = *opts.out;
    if (opts.workers) config.worker_count = *opts.workers;
    config.validate();
  } catch (const cavread::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto result = cavread::run_command(command, config);
    std::cout << result.summary << "\n";
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
  } catch (const cavread::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cavread::SolverError& e) {
    std::cerr << command << ": solver failure (residual " << e.residual() << "): " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
