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
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "cavread/lindblad.hpp"

using namespace cavread;

namespace {

const double kKappa = mhz_to_rad(53.0);
const double kG0 = mhz_to_rad(240.0);

CavityConfig single_mode(double g0, double eps, int n_max = 3) {
  CavityConfig c;
  c.kappa = kKappa;
  c.g0 = g0;
  c.modes = 1;
  c.n_max = n_max;
  c.drive_amplitude = eps;
  return c;
}

double frobenius(const SparseOperator& m) { return m.norm(); }

DensityOperator solve(const LevelScheme& s, const CavityConfig& c, double delta_lc) {
  return steady_state(build_liouvillian(build_hamiltonian(s, c, delta_lc), build_collapse_operators(s, c)));
}

}  // namespace

TEST_CASE("full Hamiltonian is Hermitian") {
  const LevelScheme s = build_rb87_d2(3.7, mhz_to_rad(95.0));
  CavityConfig c;
  c.modes = 2;
  c.n_max = 1;
  const SparseOperator h = build_hamiltonian(s, c, mhz_to_rad(-80.0));
  CHECK(h.rows() == 20 * 4);
  const SparseOperator diff = h - SparseOperator(h.adjoint());
  CHECK(frobenius(diff) <= 1e-12 * frobenius(h));
}

TEST_CASE("Jaynes-Cummings block of the two-level model") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(kG0, 0.0);
  const HilbertSpace space(2, 1, c.n_max);
  const Eigen::MatrixXcd h = Eigen::MatrixXcd(build_hamiltonian(s, c, 0.0));
  const auto g1 = space.index(0, 1), e0 = space.index(1, 0);
  CHECK(std::abs(h(g1, e0) - Complex(kG0, 0.0)) <= 1e-6);
  CHECK(std::abs(h(e0, g1) - Complex(kG0, 0.0)) <= 1e-6);
  // n photons: coupling sqrt(n) g0 between |g,n> and |e,n-1>.
  CHECK(std::abs(h(space.index(0, 3), space.index(1, 2)).real() - std::sqrt(3.0) * kG0) <= 1e-6);
  // No coupling without a photon exchange.
  CHECK(std::abs(h(space.index(0, 0), space.index(1, 0))) == 0.0);
}

TEST_CASE("Liouvillian identities") {
  const LevelScheme s = build_rb87_d2(3.7, mhz_to_rad(95.0));
  CavityConfig c;
  c.modes = 2;
  c.n_max = 1;
  DecayOptions decay;
  decay.return_ground = s.find(Manifold::ground, 2, 1);
  const SparseOperator l = build_liouvillian(build_hamiltonian(s, c, 0.0), build_collapse_operators(s, c, decay));
  const Eigen::RowVectorXcd t = trace_functional(80);
  const Eigen::RowVectorXcd tl = t * l;
  CHECK(tl.norm() <= 1e-12 * frobenius(l));

  // Without dissipators the identity commutes with everything.
  const SparseOperator closed = build_liouvillian(build_hamiltonian(s, c, 0.0), {});
  const Eigen::VectorXcd mixed = Eigen::MatrixXcd::Identity(80, 80).reshaped() / 80.0;
  CHECK((closed * mixed).norm() <= 1e-12 * frobenius(closed));

  std::vector<CollapseOperator> bad{{HilbertSpace(20, 2, 1).annihilation(0), -1.0}};
  CHECK_THROWS_AS(build_liouvillian(build_hamiltonian(s, c, 0.0), bad), std::domain_error);
}

TEST_CASE("driven empty cavity holds a coherent state") {
  const LevelScheme s = build_two_level();
  const double eps = 0.1 * kKappa;
  const CavityConfig c = single_mode(0.0, eps, 8);
  const HilbertSpace space(2, 1, c.n_max);
  const SparseOperator a = space.annihilation(0);
  const SparseOperator n = SparseOperator(a.adjoint()) * a;
  for (double d_mhz : {0.0, 25.0, -60.0, 200.0}) {
    const double d = mhz_to_rad(d_mhz);
    const DensityOperator rho = solve(s, c, d);
    const double expected = eps * eps / (kKappa * kKappa + d * d);
    CHECK(std::abs(rho.expectation(n).real() / expected - 1.0) <= 1e-6);
  }
}

TEST_CASE("photon number decays at 2 kappa") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(0.0, 0.0, 2);
  const HilbertSpace space(2, 1, c.n_max);
  const Eigen::MatrixXcd l = Eigen::MatrixXcd(build_liouvillian(build_hamiltonian(s, c, 0.0), build_collapse_operators(s, c)));
  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(6, 6);
  rho0(space.index(0, 1), space.index(0, 1)) = 1.0;
  const Eigen::MatrixXcd n = Eigen::MatrixXcd(SparseOperator(space.annihilation(0).adjoint()) * space.annihilation(0));
  for (double t : {1e-9, 5e-9, 2e-8}) {
    const Eigen::MatrixXcd lt = l * t;
    const Eigen::VectorXcd v = lt.exp() * rho0.reshaped();
    const Eigen::MatrixXcd rho = v.reshaped(6, 6);
    CHECK(std::abs((rho * n).trace().real() - std::exp(-2.0 * kKappa * t)) <= 1e-10);
  }
}

TEST_CASE("undriven steady state is the vacuum with a ground-state atom") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(kG0, 0.0);
  const DensityOperator rho = solve(s, c, mhz_to_rad(30.0));
  const HilbertSpace space(2, 1, c.n_max);
  CHECK(std::abs(rho.matrix(space.index(0, 0), space.index(0, 0)) - 1.0) <= 1e-12);
}

TEST_CASE("full-model steady state satisfies density-operator invariants") {
  const LevelScheme s = build_rb87_d2(3.7, mhz_to_rad(95.0));
  CavityConfig c;
  c.modes = 2;
  c.n_max = 1;
  c.drive_amplitude = 0.05 * c.kappa;
  SpectrumOptions opts;
  const DensityOperator rho = mixture_steady_state(s, c, mhz_to_rad(-60.0), uniform_ground_population(s), opts);
  CHECK(std::abs(rho.trace() - 1.0) <= 1e-9);
  CHECK(rho.hermiticity_error() <= 1e-9);
  CHECK(rho.min_eigenvalue() >= -1e-8);

  DecayOptions decay;
  decay.return_ground = s.find(Manifold::ground, 2, -1);
  const SparseOperator l = build_liouvillian(build_hamiltonian(s, c, mhz_to_rad(-60.0)), build_collapse_operators(s, c, decay));
  CHECK(steady_state_residual(l, steady_state(l)) <= 1e-9);
}

TEST_CASE("analytic response limits") {
  const double gamma = mhz_to_rad(3.0), eps = 1e-5 * kKappa;
  for (double d_mhz : {0.0, 40.0, -90.0}) {
    const double d = mhz_to_rad(d_mhz);
    const auto r = analytic_two_level(0.0, kKappa, gamma, d, d, eps);
    CHECK(r.transmission == doctest::Approx(kKappa * kKappa / (kKappa * kKappa + d * d)).epsilon(1e-12));
  }
  const auto on = analytic_two_level(kG0, kKappa, gamma, 0.0, 0.0, eps);
  const auto empty = analytic_two_level(0.0, kKappa, gamma, 0.0, 0.0, eps);
  CHECK(std::abs(on.amplitude) / std::abs(empty.amplitude) ==
        doctest::Approx(1.0 / (1.0 + kG0 * kG0 / (kKappa * gamma))).epsilon(1e-12));
  CHECK(empty.reflection == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two-level solver follows the linear-response formula") {
  const LevelScheme s = build_two_level();
  const double eps = 1e-5 * kKappa;
  const CavityConfig c = single_mode(kG0, eps);
  const HilbertSpace space(2, 1, c.n_max);
  const SparseOperator a = space.annihilation(0);
  for (double d_mhz : {-300.0, -240.0, -100.0, 0.0, 150.0, 235.0}) {
    const double d = mhz_to_rad(d_mhz);
    const Complex amp = solve(s, c, d).expectation(a);
    const auto ref = analytic_two_level(kG0, kKappa, s.gamma, -d, -d, eps);
    CHECK(std::abs(amp - ref.amplitude) <= 1e-6 * std::abs(ref.amplitude));
  }
}

TEST_CASE("photon-number truncation has converged in the weak-drive regime") {
  const LevelScheme s = build_two_level();
  const double eps = 1e-5 * kKappa;
  std::vector<double> grid;
  for (int i = -6; i <= 6; ++i) grid.push_back(mhz_to_rad(50.0 * i));
  std::vector<std::vector<SpectrumPoint>> runs;
  for (int n_max = 2; n_max <= 4; ++n_max) {
    runs.push_back(spectrum(s, single_mode(kG0, eps, n_max), {1.0}, grid));
  }
  for (std::size_t k = 1; k < runs.size(); ++k) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      INFO("n_max " << k + 1 << " vs " << k + 2 << " at " << rad_to_mhz(grid[i]) << " MHz");
      CHECK(std::abs(runs[k][i].transmission_rel / runs[k - 1][i].transmission_rel - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("resonant two-level spectrum is symmetric") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(kG0, 1e-5 * kKappa);
  std::vector<double> grid;
  for (double d = 10.0; d <= 400.0; d += 30.0) {
    grid.push_back(mhz_to_rad(d));
    grid.push_back(mhz_to_rad(-d));
  }
  const auto pts = spectrum(s, c, {1.0}, grid);
  for (std::size_t i = 0; i < pts.size(); i += 2) {
    CHECK(std::abs(pts[i].transmission_rel - pts[i + 1].transmission_rel) <= 1e-6 * pts[i].transmission_rel);
  }
}

TEST_CASE("empty-cavity spectrum and CSV") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(0.0, 1e-5 * kKappa);
  const auto pts = spectrum(s, c, {1.0}, {mhz_to_rad(-53.0), 0.0, mhz_to_rad(53.0)}, {});
  CHECK(pts[1].transmission_rel == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(pts[0].transmission_rel == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(pts[2].transmission_rel == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(pts[1].reflection_rel == doctest::Approx(0.0).epsilon(1e-8));
  const std::string csv = spectrum_csv(pts);
  CHECK(csv.rfind("delta_lc_hz,transmission_rel,reflection_rel\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\n-53000000,") != std::string::npos);
  CHECK_THROWS_AS(spectrum(s, c, {0.5}, {0.0}), std::invalid_argument);
}

TEST_CASE("worker count does not change a spectrum") {
  const LevelScheme s = build_two_level();
  const CavityConfig c = single_mode(kG0, 1e-5 * kKappa);
  std::vector<double> grid;
  for (int i = 0; i < 9; ++i) grid.push_back(mhz_to_rad(-200.0 + 50.0 * i));
  SpectrumOptions one, four;
  four.workers = 4;
  CHECK(spectrum_csv(spectrum(s, c, {1.0}, grid, one)) == spectrum_csv(spectrum(s, c, {1.0}, grid, four)));
}
