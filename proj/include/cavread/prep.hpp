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

#include "cavread/jumps.hpp"

namespace cavread {

/// Reservoir extraction by repeated microwave pulses with a transmission
/// check after each pulse.
struct PrepModel {
  double n_bar = 1.5;
  double p_transfer = 0.042;
  int max_pulses = 50;
  double lambda_low = 0.3;    // mean counts with a transferred atom
  double lambda_high = 22.0;  // mean counts with an empty cavity
  int count_threshold = 5;
  int n_cap = 5;              // reservoir post-selection: n <= n_cap

  void validate() const;  // throws std::invalid_argument
};

double pulse_success_prob(int n, double p);

/// Poisson(n_bar) weights over 0..n_cap, renormalized.
std::vector<double> reservoir_weights(const PrepModel& model);

struct PulseDistribution {
  std::vector<double> pmf;  // pmf[k] = P(first success on pulse k); pmf[0] = 0
  double discard = 0.0;     // no success within max_pulses
  double mean_pulses = 0.0; // conditioned on success
};

PulseDistribution pulses_pmf(const PrepModel& model);

/// P(two or more atoms transferred | successful preparation).
double multi_atom_prob(const PrepModel& model);

struct ProtocolEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t multi_atom = 0;
  double probability = 0.0;  // multi_atom / successes
  double standard_error = 0.0;
};

/// Pulse-by-pulse simulation of the preparation protocol.
ProtocolEstimate simulate_preparation(const PrepModel& model, std::uint64_t trials,
                                      std::uint64_t master_seed, unsigned workers = 1);

/// Count histogram of the detection window: weight_success * Poisson(lambda_low)
/// + (1 - weight_success) * Poisson(lambda_high), for counts 0..max_count.
std::vector<double> detection_histogram(const PrepModel& model, double weight_success,
                                        int max_count);

/// P(Poisson(lambda_high) <= threshold).
double false_positive_prob(double lambda_high, int threshold);

double jump_during_window(double t, double tau);
/// Window length t with jump_during_window(t, tau) == probability.
double window_for_jump_probability(double probability, double tau);

struct PrepStateErrors {
  double F1 = 0.0;
  double F2 = 0.0;
};
PrepStateErrors prep_state_errors(const ReadoutModel& model, double window);

/// On-resonance transmission left by n atoms each shifting the cavity by
/// `shift_per_atom` (kappa is the half width).
double dispersive_transmission(int n_atoms, double shift_per_atom, double kappa);

std::string value_probability_csv(const std::vector<double>& pmf);

}  // namespace cavread
