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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavread/jumps.hpp"

namespace cavread {

/// Joint distribution of total reflection/transmission counts over a
/// detection window for one initial state. The table covers
/// 0..cap_R x 0..cap_T; `tail_mass` is the probability outside it.
struct JointPmf {
  HyperfineState initial_state = HyperfineState::F2;
  double detection_time = 0.0;
  std::int64_t cap_R = 0;
  std::int64_t cap_T = 0;
  Eigen::ArrayXXd table;  // (cap_R + 1) x (cap_T + 1)
  double tail_mass = 0.0;
  int max_jumps = 0;
  /// Probability of more than max_jumps jumps; folded into the
  /// max_jumps term, reported here.
  double truncated_jump_mass = 0.0;

  double operator()(std::int64_t c_R, std::int64_t c_T) const { return table(c_R, c_T); }
  bool same_grid(const JointPmf& other) const;
};

struct PmfOptions {
  int max_jumps = 2;
  int quadrature_nodes = 64;
  /// Overrides the caps derived from the model; both states must share them.
  std::optional<std::array<std::int64_t, 2>> caps;
};

/// Caps mean + 12 sqrt(mean) at the larger of the two state rates per
/// channel, raised until the Poisson tail is below 1e-12.
std::array<std::int64_t, 2> default_caps(const ReadoutModel& model, double detection_time);

/// Exact jump mixture: for each k <= max_jumps, jump times are integrated
/// with a tensor Gauss-Legendre rule over the ordered simplex against the
/// product of channel Poisson pmfs at occupancy-weighted means. The k =
/// max_jumps term is rescaled to carry all remaining mass. Throws
/// std::domain_error when the caps leave more than 1e-8 outside the table.
JointPmf count_pmf(const ReadoutModel& model, HyperfineState initial, double detection_time,
                   const PmfOptions& options = {});

/// Largest absolute cell difference between the rule with n and 2n nodes.
double quadrature_convergence(const ReadoutModel& model, HyperfineState initial,
                              double detection_time, const PmfOptions& options = {});

/// true <=> classified F2, i.e. p_F2 >= p_F1 in that cell.
struct DecisionMap {
  std::int64_t cap_R = 0;
  std::int64_t cap_T = 0;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> f2;

  bool classify_f2(std::int64_t c_R, std::int64_t c_T) const { return f2(c_R, c_T); }
  bool covers(std::int64_t c_R, std::int64_t c_T) const {
    return c_R >= 0 && c_T >= 0 && c_R <= cap_R && c_T <= cap_T;
  }
};

DecisionMap decision_map(const JointPmf& p_f1, const JointPmf& p_f2);

enum class Method { TM, MLM };
const char* to_string(Method m);

struct MonteCarloStats {
  std::uint64_t trials_per_state = 0;
  std::uint64_t errors_F1 = 0;
  std::uint64_t errors_F2 = 0;
  std::pair<double, double> ci_F1;  // 95% Wilson
  std::pair<double, double> ci_F2;
  double stderr_F1 = 0.0;
  double stderr_F2 = 0.0;
  std::uint64_t master_seed = 0;
};

struct ErrorReport {
  Method method = Method::TM;
  double detection_time = 0.0;
  double eps_F1 = 0.0;
  double eps_F2 = 0.0;
  double eps = 0.0;
  double fidelity = 1.0;
  std::size_t n_bins = 1;
  std::optional<MonteCarloStats> monte_carlo;

  static ErrorReport make(Method method, double detection_time, double eps_F1, double eps_F2);
  std::string to_text() const;
};

/// Errors of a decision map: eps_F1 sums p_F1 over the F2 region,
/// eps_F2 sums p_F2 over the F1 region; each pmf's tail mass counts as error.
ErrorReport tm_errors(const JointPmf& p_f1, const JointPmf& p_f2, const DecisionMap& map);
ErrorReport tm_errors(const ReadoutModel& model, double detection_time, const PmfOptions& options = {});

struct DetectionTimeScan {
  double t_opt = 0.0;
  ErrorReport best;
  std::vector<ErrorReport> curve;  // in grid order
};

/// Grid argmin of eps; ties go to the smaller time.
DetectionTimeScan optimize_detection_time(const ReadoutModel& model, const std::vector<double>& grid,
                                          const PmfOptions& options = {});

struct ClassifierResult {
  HyperfineState inferred = HyperfineState::F2;
  double log_q_F2 = 0.0;
  double log_q_F1 = 0.0;
};

/// Forward-recursion likelihoods of a binned trace under the two-state
/// Markov chain with per-bin constant state. State at t=0 is the
/// hypothesis; each bin's state follows one bin-width transition.
class MlClassifier {
 public:
  explicit MlClassifier(const ReadoutModel& model);

  double log_likelihood(const CountTrace& trace, HyperfineState initial) const;
  ClassifierResult classify(const CountTrace& trace) const;

  /// log P(state after one bin = to | before = from).
  double log_transition(HyperfineState from, HyperfineState to) const;
  /// log of the product of channel Poisson pmfs for one bin in state s.
  double log_emission(const BinCounts& counts, HyperfineState s) const;

 private:
  double log_poisson(std::int64_t k, double log_mean, double mean) const;

  ReadoutModel model_;
  std::array<std::array<double, 2>, 2> log_transition_{};
  std::array<double, 2> mean_R_{}, mean_T_{}, log_mean_R_{}, log_mean_T_{};
  std::vector<double> log_factorial_;
};

/// Throws std::domain_error when the trace bin width differs from the model's.
ClassifierResult ml_classify(const CountTrace& trace, const ReadoutModel& model);

struct MonteCarloOptions {
  std::uint64_t n_trials = 100000;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
};

/// Monte-Carlo MLM errors with bin width T / n_bins: trajectories and traces
/// are simulated per initial state from independent (seed, trial) streams
/// and classified with MlClassifier.
ErrorReport mlm_errors(const ReadoutModel& model, double detection_time, std::size_t n_bins,
                       const MonteCarloOptions& options);

/// Monte-Carlo check of the thresholding errors: total counts of simulated
/// traces classified with `map`; counts outside the map count as errors.
ErrorReport tm_errors_monte_carlo(const ReadoutModel& model, double detection_time,
                                  const DecisionMap& map, const MonteCarloOptions& options);

struct BinCountScan {
  std::size_t chosen_bins = 0;
  std::vector<ErrorReport> curve;
};

/// Increase the detection time in whole bins of `bin_width`, following
/// `candidate_bins`, until the MC eps changes by less than
/// `relative_change` between consecutive candidates.
BinCountScan mlm_stopping_rule(const ReadoutModel& model, double bin_width,
                               const std::vector<std::size_t>& candidate_bins,
                               const MonteCarloOptions& options, double relative_change = 0.05);

/// Thresholding errors of a probe-power-scaled model after dead-time
/// saturation of its rates.
ErrorReport fast_readout_scenario(const ReadoutModel& model_scaled, double detection_time,
                                  const PmfOptions& options = {});

/// c_R,c_T,p_F1,p_F2,decision rows for every cell of the grid.
std::string pmf_csv(const JointPmf& p_f1, const JointPmf& p_f2, const DecisionMap& map);

}  // namespace cavread
