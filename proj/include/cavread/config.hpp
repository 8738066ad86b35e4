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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavread/document.hpp"
#include "cavread/jumps.hpp"
#include "cavread/levels.hpp"
#include "cavread/lindblad.hpp"
#include "cavread/prep.hpp"
#include "cavread/readout.hpp"

namespace cavread {

enum class AtomKind { none, two_level, rb87_d2 };

struct AtomSettings {
  AtomKind kind = AtomKind::rb87_d2;
  double field_gauss = 3.7;
  double light_shift = mhz_to_rad(95.0);
  double gamma = mhz_to_rad(rb87::kGammaMhz);
  std::vector<double> ground_population;  // empty: uniform over ground sublevels
};

struct SpectrumSettings {
  double start = mhz_to_rad(-400.0);
  double stop = mhz_to_rad(400.0);
  int points = 41;
  double ground_reset_rate = 2.0 * mhz_to_rad(rb87::kGammaMhz);

  std::vector<double> detunings() const;
};

struct TraceSettings {
  HyperfineState initial_state = HyperfineState::F2;
  double duration = 2e-3;
};

struct PmfSettings {
  double detection_time = 60e-6;
  int max_jumps = 2;
  int quadrature_nodes = 64;
};

struct ErrorsSettings {
  double tm_detection_time = 60e-6;
  double mlm_detection_time = 100e-6;
  int mlm_bins = 0;  // 0: detection time / bin width
  std::uint64_t mc_trials = 1000000;
  std::uint64_t tm_mc_trials = 0;  // 0 skips the Monte-Carlo cross-check
  std::vector<int> stopping_rule_bins;
};

struct OptimizeSettings {
  double start = 10e-6;
  double stop = 200e-6;
  double step = 5e-6;

  std::vector<double> grid() const;
};

struct PrepSettings {
  PrepModel model;
  std::optional<double> success_weight;  // default: first-pulse success probability
  int histogram_max_count = 40;
  std::uint64_t mc_trials = 0;
  double window = 12.5e-6;
};

/// Everything a subcommand needs. Frequencies in the text form are ordinary
/// frequencies in MHz and times carry their unit in the key; the struct
/// holds rad/s and seconds.
struct RunConfig {
  std::uint64_t master_seed = 1;
  unsigned worker_count = 1;
  std::string out_dir = ".";

  AtomSettings atom;
  CavityConfig cavity;  // drive_amplitude unused; see drive_over_kappa
  double drive_over_kappa = 1e-5;
  SpectrumSettings spectrum;
  ReadoutModel readout;
  double power_scale = 1.0;
  TraceSettings trace;
  PmfSettings pmf;
  ErrorsSettings errors;
  OptimizeSettings optimize;
  PrepSettings prep;

  /// Throws ConfigError with the offending line for unknown sections or
  /// keys, malformed values and violated invariants.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  void validate() const;  // throws ConfigError
  Document to_document() const;

  LevelScheme level_scheme() const;
  CavityConfig effective_cavity() const;  // g0 forced to 0 without an atom
  std::vector<double> ground_population() const;
  /// Readout model after probe-power scaling and dead-time saturation.
  ReadoutModel effective_readout() const;
  PmfOptions pmf_options() const;
  MonteCarloOptions monte_carlo(std::uint64_t trials) const;
};

}  // namespace cavread
