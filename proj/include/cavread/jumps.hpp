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
#include <string>
#include <vector>

#include "cavread/rng.hpp"

namespace cavread {

enum class HyperfineState { F1, F2 };

constexpr HyperfineState other(HyperfineState s) {
  return s == HyperfineState::F1 ? HyperfineState::F2 : HyperfineState::F1;
}
const char* to_string(HyperfineState s);

/// Detected count rates per hyperfine state and channel, state lifetimes
/// under the probe, detector dead time and time-bin width. Rates are
/// counts/s, times in seconds. An infinite lifetime means no jumps.
struct ReadoutModel {
  double r_T_F2 = 1.4e3;
  double r_R_F2 = 8.9e5;
  double r_T_F1 = 1.9e5;
  double r_R_F1 = 4.4e5;
  double tau_F2 = 52e-3;
  double tau_F1 = 26e-3;
  double dead_time = 0.0;
  double bin_width = 5e-6;

  void validate() const;  // throws std::invalid_argument

  double reflection_rate(HyperfineState s) const { return s == HyperfineState::F2 ? r_R_F2 : r_R_F1; }
  double transmission_rate(HyperfineState s) const { return s == HyperfineState::F2 ? r_T_F2 : r_T_F1; }
  double lifetime(HyperfineState s) const { return s == HyperfineState::F2 ? tau_F2 : tau_F1; }
};

/// Alternating hyperfine-state history on [0, total_time].
struct Trajectory {
  HyperfineState initial_state = HyperfineState::F2;
  std::vector<double> jump_times;
  double total_time = 0.0;

  HyperfineState state_at(double t) const;
  /// Time spent in `s` within [t0, t1].
  double occupancy(HyperfineState s, double t0, double t1) const;
  void validate() const;
};

struct BinCounts {
  std::int64_t reflection = 0;
  std::int64_t transmission = 0;
};

struct CountTrace {
  std::vector<BinCounts> bins;
  double bin_width = 0.0;
  std::string origin = "simulated";

  std::size_t size() const { return bins.size(); }
  BinCounts total() const;
};

Trajectory simulate_trajectory(const ReadoutModel& model, HyperfineState initial, double total_time,
                               RandomStream& rng);
Trajectory simulate_trajectory(const ReadoutModel& model, HyperfineState initial, double total_time,
                               std::uint64_t seed);

/// Poisson counts per bin whose means weight each state's rate by the time
/// spent in it. Throws std::domain_error unless total_time is an integer
/// number of bins.
CountTrace sample_counts(const Trajectory& trajectory, const ReadoutModel& model, RandomStream& rng);
CountTrace sample_counts(const Trajectory& trajectory, const ReadoutModel& model, std::uint64_t seed);

std::size_t bin_count(double total_time, double bin_width);  // throws std::domain_error

/// Non-paralyzable dead-time correction r / (1 + r * dead_time).
double effective_rate(double rate, double dead_time);

/// Model whose four rates are passed through effective_rate.
ReadoutModel apply_dead_time(const ReadoutModel& model);

/// Rates times `power_scale`, lifetimes divided by it (optical pumping
/// rate proportional to probe power).
ReadoutModel scale_probe_power(const ReadoutModel& model, double power_scale);

std::string trace_csv(const CountTrace& trace);

}  // namespace cavread
