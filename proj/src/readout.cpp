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

#include "cavread/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cavread/document.hpp"
#include "cavread/parallel.hpp"
#include "cavread/stats.hpp"

namespace cavread {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxSupportedJumps = 4;
constexpr double kTailBound = 1e-8;
// Fixed work split so Monte-Carlo tallies never depend on the worker count.
constexpr std::size_t kMonteCarloChunks = 256;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Weighted occupancy samples: probability weight of a jump configuration
// and the time it spends in the initial state.
struct OccupancyNode {
  double weight;
  double time_in_initial;
};

void collect_nodes(const ReadoutModel& model, HyperfineState initial, double T, int jumps,
                   const QuadratureRule& rule, std::vector<OccupancyNode>& out) {
  struct Walker {
    const ReadoutModel& model;
    HyperfineState initial;
    double T;
    int jumps;
    const QuadratureRule& rule;
    std::vector<OccupancyNode>& out;

    void step(int level, double t_prev, double weight, double in_initial, HyperfineState state) {
      const double rate_out = 1.0 / model.lifetime(state);
      if (level == jumps) {
        // No further jump on [t_prev, T].
        const double survive = std::exp(-(T - t_prev) * rate_out);
        const double occ = in_initial + (state == initial ? T - t_prev : 0.0);
        out.push_back({weight * survive, occ});
        return;
      }
      if (rate_out == 0.0) return;
      const double span = T - t_prev;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = t_prev + 0.5 * span * (rule.nodes[i] + 1.0);
        const double w = weight * 0.5 * span * rule.weights[i] * rate_out *
                         std::exp(-(t - t_prev) * rate_out);
        const double occ = in_initial + (state == initial ? t - t_prev : 0.0);
        step(level + 1, t, w, occ, other(state));
      }
    }
  };
  Walker{model, initial, T, jumps, rule, out}.step(0, 0.0, 1.0, 0.0, initial);
}

JointPmf count_pmf_with_rule(const ReadoutModel& model, HyperfineState initial, double T,
                             const PmfOptions& options) {
  model.validate();
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::domain_error("count_pmf: detection time must be >= 0");
  if (options.max_jumps < 0 || options.max_jumps > kMaxSupportedJumps) {
    throw std::domain_error("count_pmf: max_jumps must lie in [0, 4]");
  }
  const auto caps = options.caps ? *options.caps : default_caps(model, T);
  const QuadratureRule rule = gauss_legendre(options.quadrature_nodes);

  JointPmf pmf;
  pmf.initial_state = initial;
  pmf.detection_time = T;
  pmf.cap_R = caps[0];
  pmf.cap_T = caps[1];
  pmf.max_jumps = options.max_jumps;
  pmf.table = Eigen::ArrayXXd::Zero(caps[0] + 1, caps[1] + 1);

  const HyperfineState flipped = other(initial);
  double retained = 0.0;
  for (int k = 0; k <= options.max_jumps; ++k) {
    std::vector<OccupancyNode> nodes;
    collect_nodes(model, initial, T, k, rule, nodes);
    double mass = 0.0;
    for (const auto& n : nodes) mass += n.weight;
    if (mass <= 0.0) continue;

    double scale = 1.0;
    if (k == options.max_jumps) {
      pmf.truncated_jump_mass = std::max(0.0, 1.0 - retained - mass);
      scale = (1.0 - retained) / mass;
    }
    retained += mass;

    Eigen::ArrayXXd block = Eigen::ArrayXXd::Zero(caps[0] + 1, caps[1] + 1);
    for (const auto& n : nodes) {
      if (n.weight == 0.0) continue;
      const double rest = T - n.time_in_initial;
      const double mean_r = model.reflection_rate(initial) * n.time_in_initial +
                            model.reflection_rate(flipped) * rest;
      const double mean_t = model.transmission_rate(initial) * n.time_in_initial +
                            model.transmission_rate(flipped) * rest;
      const auto pr = poisson_pmf_table(mean_r, caps[0]);
      const auto pt = poisson_pmf_table(mean_t, caps[1]);
      const Eigen::Map<const Eigen::ArrayXd> col(pr.data(), caps[0] + 1);
      const Eigen::Map<const Eigen::ArrayXd> row(pt.data(), caps[1] + 1);
      block += n.weight * (col.matrix() * row.matrix().transpose()).array();
    }
    pmf.table += scale * block;
  }

  pmf.tail_mass = std::max(0.0, 1.0 - pmf.table.sum());
  if (pmf.tail_mass > kTailBound) {
    throw std::domain_error("count_pmf: caps (" + std::to_string(caps[0]) + ", " +
                            std::to_string(caps[1]) + ") leave tail mass " +
                            std::to_string(pmf.tail_mass) + " > 1e-8; use larger caps");
  }
  return pmf;
}

void check_bins(const CountTrace& trace, const ReadoutModel& model) {
  if (trace.bins.empty()) throw std::domain_error("ml_classify: empty trace");
  if (std::abs(trace.bin_width - model.bin_width) > 1e-12 * model.bin_width) {
    throw std::domain_error("ml_classify: trace bin width differs from the model bin width");
  }
}

MonteCarloStats tally(std::uint64_t trials, std::uint64_t errors_f1, std::uint64_t errors_f2,
                      std::uint64_t seed) {
  MonteCarloStats mc;
  mc.trials_per_state = trials;
  mc.errors_F1 = errors_f1;
  mc.errors_F2 = errors_f2;
  mc.ci_F1 = wilson_interval(errors_f1, trials);
  mc.ci_F2 = wilson_interval(errors_f2, trials);
  const double n = static_cast<double>(trials);
  const double p1 = static_cast<double>(errors_f1) / n, p2 = static_cast<double>(errors_f2) / n;
  mc.stderr_F1 = std::sqrt(p1 * (1.0 - p1) / n);
  mc.stderr_F2 = std::sqrt(p2 * (1.0 - p2) / n);
  mc.master_seed = seed;
  return mc;
}

// Counts misclassified trials from each initial state; `wrong(trace, s)`
// decides whether a trace started in s was misread.
template <typename Wrong>
std::array<std::uint64_t, 2> count_errors(const ReadoutModel& model, double T,
                                          const MonteCarloOptions& options, Wrong&& wrong) {
  std::array<std::uint64_t, 2> totals{};
  for (HyperfineState s : {HyperfineState::F1, HyperfineState::F2}) {
    const auto domain = s == HyperfineState::F1 ? StreamDomain::trials_f1 : StreamDomain::trials_f2;
    const auto bounds = chunk_bounds(options.n_trials, kMonteCarloChunks);
    std::vector<std::uint64_t> per_chunk(kMonteCarloChunks, 0);
    parallel_for(kMonteCarloChunks, options.workers, [&](std::size_t c) {
      std::uint64_t errors = 0;
      for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
        auto rng = make_stream(options.master_seed, i, domain);
        const Trajectory traj = simulate_trajectory(model, s, T, rng);
        const CountTrace trace = sample_counts(traj, model, rng);
        if (wrong(trace, s)) ++errors;
      }
      per_chunk[c] = errors;
    });
    std::uint64_t sum = 0;
    for (auto e : per_chunk) sum += e;
    totals[s == HyperfineState::F1 ? 0 : 1] = sum;
  }
  return totals;
}

}  // namespace

bool JointPmf::same_grid(const JointPmf& other) const {
  return cap_R == other.cap_R && cap_T == other.cap_T && detection_time == other.detection_time;
}

std::array<std::int64_t, 2> default_caps(const ReadoutModel& model, double detection_time) {
  const double mean_r = detection_time * std::max(model.r_R_F1, model.r_R_F2);
  const double mean_t = detection_time * std::max(model.r_T_F1, model.r_T_F2);
  return {poisson_cap(mean_r), poisson_cap(mean_t)};
}

JointPmf count_pmf(const ReadoutModel& model, HyperfineState initial, double detection_time,
                   const PmfOptions& options) {
  return count_pmf_with_rule(model, initial, detection_time, options);
}

double quadrature_convergence(const ReadoutModel& model, HyperfineState initial,
                              double detection_time, const PmfOptions& options) {
  PmfOptions coarse = options;
  if (!coarse.caps) coarse.caps = default_caps(model, detection_time);
  PmfOptions fine = coarse;
  fine.quadrature_nodes = 2 * coarse.quadrature_nodes;
  const JointPmf a = count_pmf_with_rule(model, initial, detection_time, coarse);
  const JointPmf b = count_pmf_with_rule(model, initial, detection_time, fine);
  return (a.table - b.table).abs().maxCoeff();
}

DecisionMap decision_map(const JointPmf& p_f1, const JointPmf& p_f2) {
  if (!p_f1.same_grid(p_f2)) throw std::domain_error("decision_map: pmfs are on different grids");
  DecisionMap map;
  map.cap_R = p_f1.cap_R;
  map.cap_T = p_f1.cap_T;
  map.f2 = p_f2.table >= p_f1.table;
  return map;
}

const char* to_string(Method m) { return m == Method::TM ? "TM" : "MLM"; }

ErrorReport ErrorReport::make(Method method, double detection_time, double eps_F1, double eps_F2) {
  ErrorReport r;
  r.method = method;
  r.detection_time = detection_time;
  r.eps_F1 = std::clamp(eps_F1, 0.0, 1.0);
  r.eps_F2 = std::clamp(eps_F2, 0.0, 1.0);
  r.eps = 0.5 * (r.eps_F1 + r.eps_F2);
  r.fidelity = 1.0 - r.eps;
  return r;
}

std::string ErrorReport::to_text() const {
  Document doc;
  auto& s = doc.add_section(std::string("error_report.") + to_string(method));
  s.set("method", to_string(method));
  s.set("detection_time_s", format_number(detection_time));
  s.set("n_bins", std::to_string(n_bins));
  s.set("eps_F1", format_number(eps_F1));
  s.set("eps_F2", format_number(eps_F2));
  s.set("eps", format_number(eps));
  s.set("fidelity", format_number(fidelity));
  if (monte_carlo) {
    const auto& mc = *monte_carlo;
    s.set("trials_per_state", std::to_string(mc.trials_per_state));
    s.set("errors_F1", std::to_string(mc.errors_F1));
    s.set("errors_F2", std::to_string(mc.errors_F2));
    s.set("stderr_F1", format_number(mc.stderr_F1));
    s.set("stderr_F2", format_number(mc.stderr_F2));
    s.set("ci95_F1", format_number(mc.ci_F1.first) + " " + format_number(mc.ci_F1.second));
    s.set("ci95_F2", format_number(mc.ci_F2.first) + " " + format_number(mc.ci_F2.second));
    s.set("master_seed", std::to_string(mc.master_seed));
    s.set("rng", std::string(RandomStream::kAlgorithm));
  }
  return doc.render();
}

ErrorReport tm_errors(const JointPmf& p_f1, const JointPmf& p_f2, const DecisionMap& map) {
  if (!p_f1.same_grid(p_f2) || map.cap_R != p_f1.cap_R || map.cap_T != p_f1.cap_T) {
    throw std::domain_error("tm_errors: grid mismatch");
  }
  const double eps_f1 = map.f2.select(p_f1.table, 0.0).sum() + p_f1.tail_mass;
  const double eps_f2 = map.f2.select(0.0, p_f2.table).sum() + p_f2.tail_mass;
  return ErrorReport::make(Method::TM, p_f1.detection_time, eps_f1, eps_f2);
}

ErrorReport tm_errors(const ReadoutModel& model, double detection_time, const PmfOptions& options) {
  PmfOptions shared = options;
  if (!shared.caps) shared.caps = default_caps(model, detection_time);
  const JointPmf p1 = count_pmf(model, HyperfineState::F1, detection_time, shared);
  const JointPmf p2 = count_pmf(model, HyperfineState::F2, detection_time, shared);
  return tm_errors(p1, p2, decision_map(p1, p2));
}

DetectionTimeScan optimize_detection_time(const ReadoutModel& model, const std::vector<double>& grid,
                                          const PmfOptions& options) {
  if (grid.empty()) throw std::invalid_argument("optimize_detection_time: empty grid");
  DetectionTimeScan scan;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scan.curve.push_back(tm_errors(model, grid[i], options));
    const auto& r = scan.curve.back();
    if (!best || r.eps < scan.curve[*best].eps ||
        (r.eps == scan.curve[*best].eps && grid[i] < grid[*best])) {
      best = i;
    }
  }
  scan.best = scan.curve[*best];
  scan.t_opt = grid[*best];
  return scan;
}

MlClassifier::MlClassifier(const ReadoutModel& model) : model_(model) {
  model.validate();
  const double dt = model.bin_width;
  const double leave_f2 = 1.0 / model.tau_F2;
  const double leave_f1 = 1.0 / model.tau_F1;
  const double total = leave_f2 + leave_f1;
  // Two-state chain: P(stay) and P(flip) over one bin.
  double flip_f2 = 0.0, flip_f1 = 0.0;
  if (total > 0.0) {
    const double relax = -std::expm1(-total * dt);
    flip_f2 = leave_f2 * relax / total;
    flip_f1 = leave_f1 * relax / total;
  }
  constexpr int F1 = 0, F2 = 1;
  log_transition_[F2][F1] = std::log(flip_f2);
  log_transition_[F2][F2] = std::log1p(-flip_f2);
  log_transition_[F1][F2] = std::log(flip_f1);
  log_transition_[F1][F1] = std::log1p(-flip_f1);

  mean_R_ = {model.r_R_F1 * dt, model.r_R_F2 * dt};
  mean_T_ = {model.r_T_F1 * dt, model.r_T_F2 * dt};
  for (int s = 0; s < 2; ++s) {
    log_mean_R_[s] = std::log(mean_R_[s]);
    log_mean_T_[s] = std::log(mean_T_[s]);
  }
  log_factorial_.resize(1024);
  for (std::size_t k = 0; k < log_factorial_.size(); ++k) log_factorial_[k] = std::lgamma(k + 1.0);
}

double MlClassifier::log_poisson(std::int64_t k, double log_mean, double mean) const {
  if (mean == 0.0) return k == 0 ? 0.0 : kNegInf;
  const double lf = static_cast<std::size_t>(k) < log_factorial_.size()
                        ? log_factorial_[static_cast<std::size_t>(k)]
                        : std::lgamma(static_cast<double>(k) + 1.0);
  return static_cast<double>(k) * log_mean - mean - lf;
}

double MlClassifier::log_transition(HyperfineState from, HyperfineState to) const {
  return log_transition_[from == HyperfineState::F2][to == HyperfineState::F2];
}

double MlClassifier::log_emission(const BinCounts& c, HyperfineState s) const {
  const int i = s == HyperfineState::F2 ? 1 : 0;
  return log_poisson(c.reflection, log_mean_R_[i], mean_R_[i]) +
         log_poisson(c.transmission, log_mean_T_[i], mean_T_[i]);
}

double MlClassifier::log_likelihood(const CountTrace& trace, HyperfineState initial) const {
  check_bins(trace, model_);
  // alpha[s]: log P(bins so far, current state s | initial).
  std::array<double, 2> alpha{kNegInf, kNegInf};
  alpha[initial == HyperfineState::F2] = 0.0;
  for (const auto& bin : trace.bins) {
    std::array<double, 2> next{};
    for (int to = 0; to < 2; ++to) {
      const double into = log_add(alpha[0] + log_transition_[0][to], alpha[1] + log_transition_[1][to]);
      next[to] = into + log_emission(bin, to == 1 ? HyperfineState::F2 : HyperfineState::F1);
    }
    alpha = next;
  }
  return log_add(alpha[0], alpha[1]);
}

ClassifierResult MlClassifier::classify(const CountTrace& trace) const {
  ClassifierResult r;
  r.log_q_F2 = log_likelihood(trace, HyperfineState::F2);
  r.log_q_F1 = log_likelihood(trace, HyperfineState::F1);
  r.inferred = r.log_q_F2 >= r.log_q_F1 ? HyperfineState::F2 : HyperfineState::F1;
  return r;
}

ClassifierResult ml_classify(const CountTrace& trace, const ReadoutModel& model) {
  check_bins(trace, model);
  return MlClassifier(model).classify(trace);
}

ErrorReport mlm_errors(const ReadoutModel& model, double detection_time, std::size_t n_bins,
                       const MonteCarloOptions& options) {
  if (n_bins == 0) throw std::invalid_argument("mlm_errors: n_bins must be >= 1");
  if (options.n_trials == 0) throw std::invalid_argument("mlm_errors: n_trials must be >= 1");
  ReadoutModel binned = model;
  binned.bin_width = detection_time / static_cast<double>(n_bins);
  const MlClassifier classifier(binned);
  const auto errors = count_errors(binned, detection_time, options,
                                   [&](const CountTrace& trace, HyperfineState s) {
                                     return classifier.classify(trace).inferred != s;
                                   });
  const double n = static_cast<double>(options.n_trials);
  auto report = ErrorReport::make(Method::MLM, detection_time, static_cast<double>(errors[0]) / n,
                                  static_cast<double>(errors[1]) / n);
  report.n_bins = n_bins;
  report.monte_carlo = tally(options.n_trials, errors[0], errors[1], options.master_seed);
  return report;
}

ErrorReport tm_errors_monte_carlo(const ReadoutModel& model, double detection_time,
                                  const DecisionMap& map, const MonteCarloOptions& options) {
  if (options.n_trials == 0) throw std::invalid_argument("tm_errors_monte_carlo: n_trials must be >= 1");
  ReadoutModel whole = model;
  whole.bin_width = detection_time;
  const auto errors = count_errors(whole, detection_time, options,
                                   [&](const CountTrace& trace, HyperfineState s) {
                                     const BinCounts c = trace.total();
                                     if (!map.covers(c.reflection, c.transmission)) return true;
                                     const bool f2 = map.classify_f2(c.reflection, c.transmission);
                                     return f2 != (s == HyperfineState::F2);
                                   });
  const double n = static_cast<double>(options.n_trials);
  auto report = ErrorReport::make(Method::TM, detection_time, static_cast<double>(errors[0]) / n,
                                  static_cast<double>(errors[1]) / n);
  report.monte_carlo = tally(options.n_trials, errors[0], errors[1], options.master_seed);
  return report;
}

BinCountScan mlm_stopping_rule(const ReadoutModel& model, double bin_width,
                               const std::vector<std::size_t>& candidate_bins,
                               const MonteCarloOptions& options, double relative_change) {
  if (candidate_bins.empty()) throw std::invalid_argument("mlm_stopping_rule: no candidates");
  BinCountScan scan;
  scan.chosen_bins = candidate_bins.back();
  for (std::size_t i = 0; i < candidate_bins.size(); ++i) {
    const std::size_t n = candidate_bins[i];
    scan.curve.push_back(mlm_errors(model, bin_width * static_cast<double>(n), n, options));
    if (i > 0) {
      const double previous = scan.curve[i - 1].eps;
      if (std::abs(scan.curve[i].eps - previous) < relative_change * previous) {
        scan.chosen_bins = n;
        break;
      }
    }
  }
  return scan;
}

ErrorReport fast_readout_scenario(const ReadoutModel& model_scaled, double detection_time,
                                  const PmfOptions& options) {
  return tm_errors(apply_dead_time(model_scaled), detection_time, options);
}

std::string pmf_csv(const JointPmf& p_f1, const JointPmf& p_f2, const DecisionMap& map) {
  if (!p_f1.same_grid(p_f2)) throw std::domain_error("pmf_csv: grid mismatch");
  std::string out = "c_R,c_T,p_F1,p_F2,decision\n";
  for (std::int64_t r = 0; r <= p_f1.cap_R; ++r) {
    for (std::int64_t t = 0; t <= p_f1.cap_T; ++t) {
      out += std::to_string(r) + "," + std::to_string(t) + "," + format_number(p_f1(r, t)) + "," +
             format_number(p_f2(r, t)) + "," + (map.classify_f2(r, t) ? "2" : "1") + "\n";
    }
  }
  return out;
}

}  // namespace cavread
