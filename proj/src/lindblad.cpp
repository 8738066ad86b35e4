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

#include "cavread/lindblad.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/SparseLU>
#ifdef CAVREAD_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "cavread/document.hpp"
#include "cavread/parallel.hpp"

namespace cavread {
namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseOperator from_triplets(std::size_t rows, std::size_t cols, const std::vector<Triplet>& t) {
  SparseOperator m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Appends scale * (A kron B) to `out`.
void append_kron(const SparseOperator& a, const SparseOperator& b, Complex scale,
                 std::vector<Triplet>& out) {
  const Eigen::Index nb_rows = b.rows(), nb_cols = b.cols();
  for (Eigen::Index ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseOperator::InnerIterator ia(a, ka); ia; ++ia) {
      const Complex va = scale * ia.value();
      for (Eigen::Index kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseOperator::InnerIterator ib(b, kb); ib; ++ib) {
          out.emplace_back(static_cast<int>(ia.row() * nb_rows + ib.row()),
                           static_cast<int>(ia.col() * nb_cols + ib.col()), va * ib.value());
        }
      }
    }
  }
}

double frobenius(const SparseOperator& m) { return m.norm(); }

// Frequencies of each cavity mode relative to the bare atomic reference.
std::vector<double> mode_frequencies(const LevelScheme& scheme, const CavityConfig& cavity) {
  const double driven = scheme.reference_frequency() + cavity.delta_ca;
  if (cavity.modes == 1) return {driven};
  if (cavity.driven_mode == 0) return {driven, driven - cavity.birefringent_splitting};
  return {driven + cavity.birefringent_splitting, driven};
}

}  // namespace

void CavityConfig::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("cavity: kappa must be > 0");
  if (n_max < 1) throw std::invalid_argument("cavity: n_max must be >= 1");
  if (modes != 1 && modes != 2) throw std::invalid_argument("cavity: modes must be 1 or 2");
  if (driven_mode < 0 || driven_mode >= modes) {
    throw std::invalid_argument("cavity: driven_mode must be < modes");
  }
  if (!(loss_fraction >= 0.0 && loss_fraction < 1.0)) {
    throw std::invalid_argument("cavity: loss_fraction must lie in [0, 1)");
  }
  if (!std::isfinite(g0) || !std::isfinite(drive_amplitude) || !std::isfinite(delta_ca) ||
      !std::isfinite(birefringent_splitting)) {
    throw std::invalid_argument("cavity: non-finite parameter");
  }
}

HilbertSpace::HilbertSpace(std::size_t n_levels, int modes, int n_max)
    : levels_(n_levels), modes_(modes), n_max_(n_max) {
  if (n_levels == 0 || modes < 1 || modes > 2 || n_max < 1) {
    throw std::invalid_argument("HilbertSpace: inconsistent dimensions");
  }
  fock_ = static_cast<std::size_t>(n_max + 1);
  dim_ = levels_ * (modes_ == 2 ? fock_ * fock_ : fock_);
}

std::size_t HilbertSpace::index(std::size_t level, int n0, int n1) const {
  if (modes_ == 1) return level * fock_ + static_cast<std::size_t>(n0);
  return (level * fock_ + static_cast<std::size_t>(n0)) * fock_ + static_cast<std::size_t>(n1);
}

SparseOperator HilbertSpace::annihilation(int mode) const {
  if (mode < 0 || mode >= modes_) throw std::invalid_argument("annihilation: no such mode");
  std::vector<Triplet> t;
  const int n1_max = modes_ == 2 ? n_max_ : 0;
  for (std::size_t l = 0; l < levels_; ++l) {
    for (int n0 = 0; n0 <= n_max_; ++n0) {
      for (int n1 = 0; n1 <= n1_max; ++n1) {
        const int n = mode == 0 ? n0 : n1;
        if (n == 0) continue;
        const std::size_t to = mode == 0 ? index(l, n0 - 1, n1) : index(l, n0, n1 - 1);
        t.emplace_back(static_cast<int>(to), static_cast<int>(index(l, n0, n1)), std::sqrt(double(n)));
      }
    }
  }
  return from_triplets(dim_, dim_, t);
}

SparseOperator HilbertSpace::projector(std::size_t to_level, std::size_t from_level) const {
  std::vector<Triplet> t;
  const int n1_max = modes_ == 2 ? n_max_ : 0;
  for (int n0 = 0; n0 <= n_max_; ++n0) {
    for (int n1 = 0; n1 <= n1_max; ++n1) {
      t.emplace_back(static_cast<int>(index(to_level, n0, n1)),
                     static_cast<int>(index(from_level, n0, n1)), 1.0);
    }
  }
  return from_triplets(dim_, dim_, t);
}

SparseOperator HilbertSpace::identity() const {
  SparseOperator id(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  id.setIdentity();
  return id;
}

SparseOperator build_hamiltonian(const LevelScheme& scheme, const CavityConfig& cavity,
                                 double delta_lc) {
  cavity.validate();
  scheme.validate();
  const HilbertSpace space(scheme.size(), cavity.modes, cavity.n_max);
  const auto modes = mode_frequencies(scheme, cavity);
  const double drive_frequency = modes[static_cast<std::size_t>(cavity.driven_mode)] + delta_lc;

  std::vector<Triplet> t;
  const int n1_max = cavity.modes == 2 ? cavity.n_max : 0;
  for (std::size_t l = 0; l < scheme.size(); ++l) {
    const auto& level = scheme.levels[l];
    const double atomic =
        level.manifold == Manifold::excited ? level.energy - drive_frequency : level.energy;
    for (int n0 = 0; n0 <= cavity.n_max; ++n0) {
      for (int n1 = 0; n1 <= n1_max; ++n1) {
        double diag = atomic + n0 * (modes[0] - drive_frequency);
        if (cavity.modes == 2) diag += n1 * (modes[1] - drive_frequency);
        const auto i = static_cast<int>(space.index(l, n0, n1));
        t.emplace_back(i, i, diag);

        // Drive on the pumped mode: eps (a + a^dagger).
        const int nd = cavity.driven_mode == 0 ? n0 : n1;
        if (nd < cavity.n_max) {
          const auto up = static_cast<int>(cavity.driven_mode == 0 ? space.index(l, n0 + 1, n1)
                                                                   : space.index(l, n0, n1 + 1));
          const double v = cavity.drive_amplitude * std::sqrt(nd + 1.0);
          t.emplace_back(up, i, v);
          t.emplace_back(i, up, v);
        }
      }
    }
  }

  // g_eff (a sigma+ + a^dagger sigma-) for each transition and coupled mode.
  for (const auto& tr : scheme.transitions) {
    int mode = 0;
    double weight = 1.0;
    if (cavity.modes == 2 && tr.polarization != Polarization::pi) {
      mode = 1;
      weight = 1.0 / std::sqrt(2.0);
    }
    const double g = cavity.g0 * tr.relative_dipole * weight;
    if (g == 0.0) continue;
    for (int n0 = 0; n0 <= cavity.n_max; ++n0) {
      for (int n1 = 0; n1 <= n1_max; ++n1) {
        const int n = mode == 0 ? n0 : n1;
        if (n == 0) continue;
        // |g, n> -> |e, n-1>
        const auto from = static_cast<int>(space.index(tr.ground, n0, n1));
        const auto to = static_cast<int>(mode == 0 ? space.index(tr.excited, n0 - 1, n1)
                                                   : space.index(tr.excited, n0, n1 - 1));
        const double v = g * std::sqrt(double(n));
        t.emplace_back(to, from, v);
        t.emplace_back(from, to, v);
      }
    }
  }
  return from_triplets(space.dimension(), space.dimension(), t);
}

std::vector<CollapseOperator> build_collapse_operators(const LevelScheme& scheme,
                                                       const CavityConfig& cavity,
                                                       const DecayOptions& decay) {
  cavity.validate();
  const HilbertSpace space(scheme.size(), cavity.modes, cavity.n_max);
  std::vector<CollapseOperator> out;
  for (int mode = 0; mode < cavity.modes; ++mode) {
    out.push_back({space.annihilation(mode), 2.0 * cavity.kappa});
  }

  const double emission = 2.0 * scheme.gamma;
  if (decay.return_ground) {
    const std::size_t target = *decay.return_ground;
    if (target >= scheme.size() || scheme.levels[target].manifold != Manifold::ground) {
      throw std::invalid_argument("decay: return_ground is not a ground level");
    }
    for (std::size_t e : scheme.excited_levels()) {
      out.push_back({space.projector(target, e), emission});
    }
    if (decay.ground_reset_rate < 0.0) throw std::domain_error("decay: negative reset rate");
    if (decay.ground_reset_rate > 0.0) {
      for (std::size_t g : scheme.ground_levels()) {
        if (g != target) out.push_back({space.projector(target, g), decay.ground_reset_rate});
      }
    }
    return out;
  }

  // One coherent lowering operator per polarization.
  for (Polarization q : {Polarization::sigma_minus, Polarization::pi, Polarization::sigma_plus}) {
    SparseOperator sum(static_cast<Eigen::Index>(space.dimension()),
                       static_cast<Eigen::Index>(space.dimension()));
    bool any = false;
    for (const auto& tr : scheme.transitions) {
      if (tr.polarization != q) continue;
      const double retained = 1.0 - scheme.external_branching[tr.excited];
      sum += (tr.relative_dipole / std::sqrt(retained)) * space.projector(tr.ground, tr.excited);
      any = true;
    }
    if (any) out.push_back({sum, emission});
  }
  return out;
}

SparseOperator build_liouvillian(const SparseOperator& hamiltonian,
                                 const std::vector<CollapseOperator>& collapse) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw std::domain_error("build_liouvillian: Hamiltonian is not square");
  }
  const auto n = static_cast<std::size_t>(hamiltonian.rows());
  SparseOperator id(hamiltonian.rows(), hamiltonian.cols());
  id.setIdentity();
  const Complex i_unit(0.0, 1.0);

  std::vector<Triplet> t;
  append_kron(id, hamiltonian, -i_unit, t);
  append_kron(SparseOperator(hamiltonian.transpose()), id, i_unit, t);
  for (const auto& c : collapse) {
    if (c.rate < 0.0) throw std::domain_error("build_liouvillian: negative collapse rate");
    if (c.op.rows() != hamiltonian.rows() || c.op.cols() != hamiltonian.cols()) {
      throw std::domain_error("build_liouvillian: collapse operator dimension mismatch");
    }
    if (c.rate == 0.0) continue;
    const SparseOperator op = std::sqrt(c.rate) * c.op;
    const SparseOperator op_dag = op.adjoint();
    const SparseOperator number = op_dag * op;
    append_kron(SparseOperator(op.conjugate()), op, 1.0, t);
    append_kron(id, number, -0.5, t);
    append_kron(SparseOperator(number.transpose()), id, -0.5, t);
  }
  return from_triplets(n * n, n * n, t);
}

Eigen::RowVectorXcd trace_functional(std::size_t dimension) {
  Eigen::RowVectorXcd t = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(dimension * dimension));
  for (std::size_t i = 0; i < dimension; ++i) t(static_cast<Eigen::Index>(i * dimension + i)) = 1.0;
  return t;
}

Complex DensityOperator::expectation(const SparseOperator& op) const {
  Complex sum = 0.0;
  for (Eigen::Index k = 0; k < op.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(op, k); it; ++it) {
      sum += it.value() * matrix(it.col(), it.row());
    }
  }
  return sum;
}

double DensityOperator::hermiticity_error() const {
  return (matrix - matrix.adjoint()).norm();
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(0.5 * (matrix + matrix.adjoint()),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double steady_state_residual(const SparseOperator& liouvillian, const DensityOperator& rho) {
  const Eigen::Index n = rho.matrix.rows();
  Eigen::Map<const Eigen::VectorXcd> vec(rho.matrix.data(), n * n);
  return (liouvillian * vec).norm() / frobenius(liouvillian);
}

DensityOperator steady_state(const SparseOperator& liouvillian, const SteadyStateOptions& options) {
  const Eigen::Index size = liouvillian.rows();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(size))));
  if (liouvillian.cols() != size || n * n != size) {
    throw std::domain_error("steady_state: Liouvillian is not a square superoperator");
  }

  // Replace the first row (the rho_00 equation) by the trace constraint.
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(liouvillian.nonZeros() + n));
  for (Eigen::Index k = 0; k < liouvillian.outerSize(); ++k) {
    for (SparseOperator::InnerIterator it(liouvillian, k); it; ++it) {
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(0, static_cast<int>(i * n + i), 1.0);
  const SparseOperator system = from_triplets(static_cast<std::size_t>(size), static_cast<std::size_t>(size), t);

#ifdef CAVREAD_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseOperator> lu;
#else
  Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>> lu;
#endif
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw SolverError("steady_state: sparse LU factorization failed",
                      std::numeric_limits<double>::infinity());
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(size);
  rhs(0) = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  for (int step = 0; step < options.refinement_steps; ++step) {
    const Eigen::VectorXcd r = rhs - system * x;
    if (r.norm() == 0.0) break;
    x += lu.solve(r);
  }

  const double residual = (liouvillian * x).norm() / frobenius(liouvillian);
  if (!std::isfinite(residual) || residual > options.relative_tolerance) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "steady_state: residual %.3e exceeds tolerance %.1e", residual,
                  options.relative_tolerance);
    throw SolverError(buf, residual);
  }
  DensityOperator rho;
  rho.matrix = Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n);
  return rho;
}

TwoLevelResponse analytic_two_level(double g, double kappa, double gamma, double delta_c,
                                    double delta_a, double eps) {
  const Complex i_unit(0.0, 1.0);
  const Complex atom = gamma + i_unit * delta_a;
  const Complex amplitude = -i_unit * eps * atom / ((kappa + i_unit * delta_c) * atom + g * g);
  TwoLevelResponse out;
  out.amplitude = amplitude;
  out.transmission = std::norm(amplitude) * kappa * kappa / (eps * eps);
  out.reflection = std::norm(1.0 - kappa * i_unit * amplitude / eps);
  return out;
}

std::vector<double> uniform_ground_population(const LevelScheme& scheme) {
  const auto ground = scheme.ground_levels();
  return std::vector<double>(ground.size(), 1.0 / static_cast<double>(ground.size()));
}

namespace {

void check_population(const LevelScheme& scheme, const std::vector<double>& population) {
  if (population.size() != scheme.ground_levels().size()) {
    throw std::invalid_argument("ground population must have one weight per ground level");
  }
  double total = 0.0;
  for (double w : population) {
    if (!(w >= 0.0)) throw std::invalid_argument("ground population weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ground population must sum to 1");
}

struct Component {
  double weight;
  DensityOperator rho;
};

std::vector<Component> components(const LevelScheme& scheme, const CavityConfig& cavity,
                                  double delta_lc, const std::vector<double>& population,
                                  const SpectrumOptions& options) {
  const SparseOperator h = build_hamiltonian(scheme, cavity, delta_lc);
  const auto ground = scheme.ground_levels();
  std::vector<Component> out;
  for (std::size_t k = 0; k < ground.size(); ++k) {
    if (population[k] == 0.0) continue;
    DecayOptions decay;
    decay.return_ground = ground[k];
    decay.ground_reset_rate = options.ground_reset_rate;
    const auto l = build_liouvillian(h, build_collapse_operators(scheme, cavity, decay));
    out.push_back({population[k], steady_state(l, options.solver)});
  }
  return out;
}

}  // namespace

DensityOperator mixture_steady_state(const LevelScheme& scheme, const CavityConfig& cavity,
                                     double delta_lc, const std::vector<double>& ground_population,
                                     const SpectrumOptions& options) {
  check_population(scheme, ground_population);
  DensityOperator mix;
  for (auto& c : components(scheme, cavity, delta_lc, ground_population, options)) {
    if (mix.matrix.size() == 0) {
      mix.matrix = c.weight * c.rho.matrix;
    } else {
      mix.matrix += c.weight * c.rho.matrix;
    }
  }
  return mix;
}

std::vector<SpectrumPoint> spectrum(const LevelScheme& scheme, const CavityConfig& cavity,
                                    const std::vector<double>& ground_population,
                                    const std::vector<double>& detunings,
                                    const SpectrumOptions& options) {
  cavity.validate();
  check_population(scheme, ground_population);
  for (double d : detunings) {
    if (!std::isfinite(d)) throw std::invalid_argument("spectrum: non-finite detuning");
  }
  const HilbertSpace space(scheme.size(), cavity.modes, cavity.n_max);
  const SparseOperator a = space.annihilation(cavity.driven_mode);
  const SparseOperator number = SparseOperator(a.adjoint()) * a;
  const double eps = cavity.drive_amplitude;
  const double empty_peak = eps * eps / (cavity.kappa * cavity.kappa);
  const double kappa_ext = cavity.external_kappa();
  const Complex i_unit(0.0, 1.0);

  std::vector<SpectrumPoint> out(detunings.size());
  parallel_for(detunings.size(), options.workers, [&](std::size_t i) {
    SpectrumPoint p;
    p.delta_lc = detunings[i];
    // Each component is one atom realization; intensities average incoherently.
    for (const auto& c : components(scheme, cavity, detunings[i], ground_population, options)) {
      p.transmission_rel += c.weight * c.rho.expectation(number).real() / empty_peak;
      const Complex amp = c.rho.expectation(a);
      p.reflection_rel += c.weight * std::norm(1.0 - 2.0 * kappa_ext * i_unit * amp / eps);
    }
    out[i] = p;
  });
  return out;
}

double spectrum_residual(const std::vector<SpectrumPoint>& model,
                         const std::vector<double>& measured_transmission, SpectrumResidual kind) {
  if (model.size() != measured_transmission.size()) {
    throw std::invalid_argument("spectrum_residual: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double a = model[i].transmission_rel, b = measured_transmission[i];
    if (kind == SpectrumResidual::amplitude) {
      a = std::sqrt(std::max(a, 0.0));
      b = std::sqrt(std::max(b, 0.0));
    }
    sum += (a - b) * (a - b);
  }
  return sum;
}

std::string spectrum_csv(const std::vector<SpectrumPoint>& points) {
  std::string out = "delta_lc_hz,transmission_rel,reflection_rel\n";
  for (const auto& p : points) {
    out += format_number(p.delta_lc / kTwoPi) + "," + format_number(p.transmission_rel) + "," +
           format_number(p.reflection_rel) + "\n";
  }
  return out;
}

}  // namespace cavread
