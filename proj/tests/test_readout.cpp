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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cavread/readout.hpp"
#include "cavread/stats.hpp"
#include "oracles.hpp"

using namespace cavread;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ReadoutModel frozen() {
  ReadoutModel m;
  m.tau_F1 = m.tau_F2 = kInf;
  return m;
}

double marginal_mean_R(const JointPmf& p) {
  double mean = 0.0;
  for (Eigen::Index r = 0; r < p.table.rows(); ++r) mean += static_cast<double>(r) * p.table.row(r).sum();
  return mean;
}

}  // namespace

TEST_CASE("no-jump limit is a product of Poisson pmfs") {
  const ReadoutModel m = frozen();
  const double T = 60e-6;
  const JointPmf p = count_pmf(m, HyperfineState::F1, T);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < p.table.rows(); ++r) {
    for (Eigen::Index t = 0; t < p.table.cols(); ++t) {
      const double ref = static_cast<double>(oracle::poisson_pmf(r, m.r_R_F1 * T) * oracle::poisson_pmf(t, m.r_T_F1 * T));
      worst = std::max(worst, std::abs(p(r, t) - ref));
    }
  }
  CHECK(worst <= 1e-15);
  CHECK(p.truncated_jump_mass == 0.0);
}

TEST_CASE("pmf normalization and tail bound at reference parameters") {
  const ReadoutModel m;
  for (auto s : {HyperfineState::F1, HyperfineState::F2}) {
    const JointPmf p = count_pmf(m, s, 60e-6);
    CHECK((p.table >= 0.0).all());
    CHECK(std::abs(p.table.sum() + p.tail_mass - 1.0) <= 1e-10);
    CHECK(p.tail_mass < 1e-8);
    // Three jumps dominate the truncated mass: T^3 r0 r1 r0 / 6 to leading order.
    const double r0 = 1.0 / m.lifetime(s), r1 = 1.0 / m.lifetime(other(s));
    const double leading = std::pow(60e-6, 3) * r0 * r1 * r0 / 6.0;
    CHECK(p.truncated_jump_mass == doctest::Approx(leading).epsilon(0.01));
  }
}

TEST_CASE("quadrature has converged at 64 nodes") {
  const ReadoutModel m;
  CHECK(quadrature_convergence(m, HyperfineState::F2, 60e-6) <= 1e-10);
  CHECK(quadrature_convergence(m, HyperfineState::F1, 60e-6) <= 1e-10);
}

TEST_CASE("marginal mean follows the expected occupancy") {
  ReadoutModel m;
  m.tau_F2 = 200e-6;
  m.tau_F1 = 150e-6;
  const double T = 60e-6;
  PmfOptions opts;
  opts.max_jumps = 4;
  opts.quadrature_nodes = 16;  // smooth integrand; 64^4 nodes would take minutes
  for (auto s : {HyperfineState::F1, HyperfineState::F2}) {
    const JointPmf p = count_pmf(m, s, T, opts);
    const double occ = oracle::expected_occupancy(m, s, T);
    const double expected = m.reflection_rate(s) * occ + m.reflection_rate(other(s)) * (T - occ);
    CHECK(marginal_mean_R(p) == doctest::Approx(expected).epsilon(1e-5));
  }
}

TEST_CASE("marginal mean agrees with 1e7 simulated windows") {
  const ReadoutModel m;
  const double T = 60e-6;
  const JointPmf p = count_pmf(m, HyperfineState::F2, T);
  ReadoutModel whole = m;
  whole.bin_width = T;
  const std::uint64_t n = 10000000;
  double sum = 0.0, sq = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto rng = make_stream(77, i, StreamDomain::trials_f2);
    const auto tr = simulate_trajectory(whole, HyperfineState::F2, T, rng);
    const double c = static_cast<double>(sample_counts(tr, whole, rng).bins[0].reflection);
    sum += c;
    sq += c * c;
  }
  const double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(mean - marginal_mean_R(p)) <= 3.0 * std::sqrt(var / n));
}

TEST_CASE("decision map rules") {
  const ReadoutModel m = frozen();
  const JointPmf p = count_pmf(m, HyperfineState::F1, 10e-6);
  CHECK(decision_map(p, p).f2.all());  // ties go to F2

  JointPmf a = p, b = p;
  a.table.setZero();
  b.table.setZero();
  a.table(0, 0) = 1.0;
  b.table(1, 0) = 1.0;
  a.tail_mass = b.tail_mass = 0.0;
  const DecisionMap d = decision_map(a, b);
  CHECK_FALSE(d.classify_f2(0, 0));
  CHECK(d.classify_f2(1, 0));
  const ErrorReport r = tm_errors(a, b, d);
  CHECK(r.eps_F1 == 0.0);
  CHECK(r.eps_F2 == 0.0);

  JointPmf c = count_pmf(m, HyperfineState::F1, 20e-6);
  CHECK_THROWS_AS(decision_map(p, c), std::domain_error);
}

TEST_CASE("degenerate limits of the threshold errors") {
  const ReadoutModel m;
  const ErrorReport zero = tm_errors(m, 0.0);
  CHECK(zero.eps_F1 == 1.0);
  CHECK(zero.eps_F2 == 0.0);
  CHECK(zero.eps == 0.5);

  ReadoutModel same = m;
  same.r_R_F1 = same.r_R_F2;
  same.r_T_F1 = same.r_T_F2;
  for (double T : {20e-6, 60e-6, 150e-6}) {
    CHECK(tm_errors(same, T).eps == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(tm_errors(m, -1e-6), std::domain_error);
}

TEST_CASE("undersized caps are rejected") {
  const ReadoutModel m;
  PmfOptions o;
  o.caps = std::array<std::int64_t, 2>{20, 5};
  CHECK_THROWS_AS(count_pmf(m, HyperfineState::F2, 60e-6, o), std::domain_error);
}

TEST_CASE("error report invariants and text") {
  const ErrorReport r = ErrorReport::make(Method::TM, 60e-6, 7e-4, 9e-4);
  CHECK(r.eps == (r.eps_F1 + r.eps_F2) / 2.0);
  CHECK(r.fidelity == 1.0 - r.eps);
  const std::string text = r.to_text();
  CHECK(text.find("method = TM") != std::string::npos);
  CHECK(text.find("eps_F1 = 0.0007") != std::string::npos);
}

TEST_CASE("detection-time scan") {
  SUBCASE("shot-noise limit favours the longest window") {
    const ReadoutModel m = frozen();
    std::vector<double> grid;
    for (int i = 1; i <= 8; ++i) grid.push_back(5e-6 * i);
    const auto scan = optimize_detection_time(m, grid);
    CHECK(scan.t_opt == grid.back());
    for (std::size_t i = 1; i < scan.curve.size(); ++i) CHECK(scan.curve[i].eps < scan.curve[i - 1].eps);
  }
  SUBCASE("ties go to the shorter time") {
    ReadoutModel m;
    m.r_R_F1 = m.r_R_F2;
    m.r_T_F1 = m.r_T_F2;
    const auto scan = optimize_detection_time(m, {30e-6, 10e-6, 20e-6});
    CHECK(scan.t_opt == 10e-6);
  }
  SUBCASE("rates x10 and lifetimes /10 shrink the optimum tenfold") {
    const ReadoutModel m;
    ReadoutModel fast = scale_probe_power(m, 10.0);
    std::vector<double> grid, grid_fast;
    for (int i = 0; i <= 12; ++i) {
      grid.push_back(30e-6 + 5e-6 * i);
      grid_fast.push_back(grid.back() / 10.0);
    }
    const auto a = optimize_detection_time(m, grid);
    const auto b = optimize_detection_time(fast, grid_fast);
    CHECK(b.t_opt == doctest::Approx(a.t_opt / 10.0).epsilon(1e-12));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(b.curve[i].eps == doctest::Approx(a.curve[i].eps).epsilon(1e-8));
    }
  }
}

TEST_CASE("forward recursion equals the path sum") {
  ReadoutModel m;
  m.tau_F2 = 40e-6;
  m.tau_F1 = 25e-6;
  m.bin_width = 5e-6;
  RandomStream rng(5, 0);
  const MlClassifier ml(m);
  for (int fixture = 0; fixture < 40; ++fixture) {
    CountTrace trace;
    trace.bin_width = m.bin_width;
    const int n = 1 + fixture % 6;
    for (int i = 0; i < n; ++i) trace.bins.push_back({rng.poisson(3.0), rng.poisson(0.5)});
    for (int s : {0, 1}) {
      const auto state = s ? HyperfineState::F2 : HyperfineState::F1;
      const long double ref = oracle::path_sum(trace, m, s);
      CHECK(std::abs(std::exp(static_cast<long double>(ml.log_likelihood(trace, state))) / ref - 1.0L) <= 1e-12L);
    }
  }
}

TEST_CASE("single-bin MLM with frozen states reproduces the threshold map") {
  ReadoutModel m = frozen();
  m.bin_width = 60e-6;
  const JointPmf p1 = count_pmf(m, HyperfineState::F1, 60e-6);
  const JointPmf p2 = count_pmf(m, HyperfineState::F2, 60e-6);
  const DecisionMap map = decision_map(p1, p2);
  const MlClassifier ml(m);
  int mismatches = 0;
  for (std::int64_t r = 0; r <= map.cap_R; ++r) {
    for (std::int64_t t = 0; t <= map.cap_T; ++t) {
      if (p1(r, t) < 1e-300 || p2(r, t) < 1e-300) continue;  // underflow in linear space
      if (std::abs(std::log(p2(r, t) / p1(r, t))) < 1e-9) continue;  // rounding-level tie
      CountTrace trace{{{r, t}}, m.bin_width, "injected"};
      mismatches += (ml.classify(trace).inferred == HyperfineState::F2) != map.classify_f2(r, t);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("constructed trace with a mid-record drop is read as F2") {
  const ReadoutModel m;
  CountTrace trace;
  trace.bin_width = m.bin_width;
  for (int i = 0; i < 5; ++i) trace.bins.push_back({50, 0});
  for (int i = 0; i < 5; ++i) trace.bins.push_back({25, 1});
  const auto r = ml_classify(trace, m);
  CHECK(r.inferred == HyperfineState::F2);
  CHECK(r.log_q_F2 > r.log_q_F1);
}

TEST_CASE("likelihood ratio is invariant under bin merging without jumps") {
  ReadoutModel fine = frozen();
  fine.bin_width = 5e-6;
  ReadoutModel coarse = fine;
  coarse.bin_width = 10e-6;
  RandomStream rng(8, 1);
  for (int k = 0; k < 20; ++k) {
    CountTrace a{{}, fine.bin_width, "injected"}, b{{}, coarse.bin_width, "injected"};
    for (int i = 0; i < 6; ++i) {
      const BinCounts x{rng.poisson(3.0), rng.poisson(0.4)}, y{rng.poisson(3.0), rng.poisson(0.4)};
      a.bins.push_back(x);
      a.bins.push_back(y);
      b.bins.push_back({x.reflection + y.reflection, x.transmission + y.transmission});
    }
    const auto ra = ml_classify(a, fine), rb = ml_classify(b, coarse);
    const double da = ra.log_q_F2 - ra.log_q_F1, db = rb.log_q_F2 - rb.log_q_F1;
    CHECK(std::abs(da - db) <= 1e-10 * std::max(1.0, std::abs(da)));
    CHECK(ra.inferred == rb.inferred);
  }
}

TEST_CASE("bin width mismatch is rejected") {
  const ReadoutModel m;
  CountTrace t{{{1, 0}}, 7e-6, "injected"};
  CHECK_THROWS_AS(ml_classify(t, m), std::domain_error);
}

TEST_CASE("MLM with frozen states and one bin matches the threshold errors") {
  ReadoutModel m = frozen();
  m.r_R_F2 *= 0.1;
  m.r_R_F1 *= 0.1;
  m.r_T_F1 *= 0.1;
  m.r_T_F2 *= 0.1;
  const double T = 60e-6;
  const ErrorReport tm = tm_errors(m, T);
  MonteCarloOptions o;
  o.n_trials = 200000;
  o.master_seed = 3;
  const ErrorReport mlm = mlm_errors(m, T, 1, o);
  const double n = static_cast<double>(o.n_trials);
  CHECK(std::abs(mlm.eps_F1 - tm.eps_F1) <= 4.0 * std::sqrt(tm.eps_F1 * (1 - tm.eps_F1) / n));
  CHECK(std::abs(mlm.eps_F2 - tm.eps_F2) <= 4.0 * std::sqrt(tm.eps_F2 * (1 - tm.eps_F2) / n));
}

TEST_CASE("MLM beats thresholding at equal detection time") {
  const ReadoutModel m;
  const double T = 100e-6;
  MonteCarloOptions o;
  o.n_trials = 1000000;
  o.master_seed = 12;
  const ErrorReport mlm = mlm_errors(m, T, 20, o);
  const ErrorReport tm = tm_errors(m, T);
  const double sigma = std::sqrt(0.5 * (mlm.monte_carlo->stderr_F1 * mlm.monte_carlo->stderr_F1 +
                                        mlm.monte_carlo->stderr_F2 * mlm.monte_carlo->stderr_F2));
  CHECK(mlm.eps + 3.0 * sigma < tm.eps);
}

TEST_CASE("Monte-Carlo results do not depend on the worker count") {
  ReadoutModel m;
  m.tau_F2 = m.tau_F1 = 1e-3;
  MonteCarloOptions one, three;
  one.n_trials = three.n_trials = 20000;
  three.workers = 3;
  const auto a = mlm_errors(m, 100e-6, 20, one), b = mlm_errors(m, 100e-6, 20, three);
  CHECK(a.monte_carlo->errors_F1 == b.monte_carlo->errors_F1);
  CHECK(a.monte_carlo->errors_F2 == b.monte_carlo->errors_F2);
  CHECK(a.to_text() == b.to_text());
}

TEST_CASE("threshold Monte-Carlo check at reduced rates") {
  ReadoutModel m;
  m.r_R_F2 *= 0.1;
  m.r_R_F1 *= 0.1;
  m.r_T_F1 *= 0.1;
  m.r_T_F2 *= 0.1;
  const double T = 60e-6;
  const JointPmf p1 = count_pmf(m, HyperfineState::F1, T), p2 = count_pmf(m, HyperfineState::F2, T);
  const DecisionMap map = decision_map(p1, p2);
  const ErrorReport exact = tm_errors(p1, p2, map);
  MonteCarloOptions o;
  o.n_trials = 200000;
  const ErrorReport mc = tm_errors_monte_carlo(m, T, map, o);
  const double n = static_cast<double>(o.n_trials);
  CHECK(std::abs(mc.eps_F1 - exact.eps_F1) <= 4.0 * std::sqrt(exact.eps_F1 / n));
  CHECK(std::abs(mc.eps_F2 - exact.eps_F2) <= 4.0 * std::sqrt(exact.eps_F2 / n));
}

TEST_CASE("fast readout: saturation hurts, total saturation is blind") {
  const ReadoutModel base = scale_probe_power(ReadoutModel{}, 20.0);
  const double T = 2e-6;
  ReadoutModel dead = base;
  dead.dead_time = 50e-9;
  const double e0 = fast_readout_scenario(base, T).eps;
  const double e50 = fast_readout_scenario(dead, T).eps;
  CHECK(e0 < e50);

  ReadoutModel blind = base;
  blind.dead_time = 1.0;
  CHECK(fast_readout_scenario(blind, T).eps == doctest::Approx(0.5).epsilon(1e-6));

  bool reached = false;
  for (double scale : {5.0, 10.0, 20.0, 50.0}) {
    ReadoutModel s = scale_probe_power(ReadoutModel{}, scale);
    s.dead_time = 50e-9;
    reached |= fast_readout_scenario(s, T).eps <= 6e-3;
  }
  CHECK(reached);
}

TEST_CASE("stopping rule picks one of the candidates") {
  ReadoutModel m;
  MonteCarloOptions o;
  o.n_trials = 20000;
  const auto scan = mlm_stopping_rule(m, 5e-6, {4, 8, 12, 16, 20}, o);
  CHECK(scan.curve.size() >= 2);
  CHECK(scan.chosen_bins % 4 == 0);
  CHECK(scan.curve.back().n_bins == scan.chosen_bins);
}

TEST_CASE("pmf CSV layout") {
  const ReadoutModel m = frozen();
  const JointPmf p1 = count_pmf(m, HyperfineState::F1, 5e-6), p2 = count_pmf(m, HyperfineState::F2, 5e-6);
  const std::string csv = pmf_csv(p1, p2, decision_map(p1, p2));
  CHECK(csv.rfind("c_R,c_T,p_F1,p_F2,decision\n0,0,", 0) == 0);
  const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(rows == (p1.cap_R + 1) * (p1.cap_T + 1));
}
