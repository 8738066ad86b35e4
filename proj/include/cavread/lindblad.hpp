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

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cavread/levels.hpp"

namespace cavread {

using Complex = std::complex<double>;
using SparseOperator = Eigen::SparseMatrix<Complex>;

/// Cavity parameters. All rates are angular frequencies; kappa is the field
/// decay rate (half width of the empty-cavity Lorentzian).
///
/// Mode 0 is pi-polarized, mode 1 (when present) the orthogonal linear mode
/// lying `birefringent_splitting` below it. The driven mode sits at the
/// atomic reference frequency plus `delta_ca`.
struct CavityConfig {
  double kappa = mhz_to_rad(53.0);
  double g0 = mhz_to_rad(240.0);
  double birefringent_splitting = mhz_to_rad(540.0);
  double delta_ca = 0.0;
  int modes = 1;
  int driven_mode = 0;
  double drive_amplitude = 1e-5 * mhz_to_rad(53.0);
  int n_max = 3;
  double loss_fraction = 0.0;  // share of kappa not leaving through the mirrors

  void validate() const;  // throws std::invalid_argument
  double external_kappa() const { return 0.5 * kappa * (1.0 - loss_fraction); }
};

/// Product space (atomic levels) x (Fock 0..n_max per mode), mode 0 varying
/// slower than mode 1 and the atomic index slowest.
class HilbertSpace {
 public:
  HilbertSpace(std::size_t n_levels, int modes, int n_max);

  std::size_t dimension() const { return dim_; }
  std::size_t levels() const { return levels_; }
  int modes() const { return modes_; }
  int n_max() const { return n_max_; }
  std::size_t index(std::size_t level, int n0, int n1 = 0) const;

  SparseOperator annihilation(int mode) const;
  SparseOperator projector(std::size_t to_level, std::size_t from_level) const;  // |to><from| (x) 1
  SparseOperator identity() const;

 private:
  std::size_t levels_;
  int modes_;
  int n_max_;
  std::size_t fock_;
  std::size_t dim_;
};

struct CollapseOperator {
  SparseOperator op;
  double rate = 0.0;  // applied as sqrt(rate) * op
};

/// Where spontaneous emission lands.
struct DecayOptions {
  /// When set, every excited level decays to this ground level at the full
  /// rate 2*gamma and every other ground level is reset to it at
  /// `ground_reset_rate`; this pins the atom to one ground sublevel. When
  /// unset, decay follows the dipole branching within the scheme, rescaled
  /// so each excited level still decays at 2*gamma.
  std::optional<std::size_t> return_ground;
  double ground_reset_rate = 2.0 * mhz_to_rad(rb87::kGammaMhz);
};

/// Rotating-frame Hamiltonian at the drive frequency omega_c + delta_lc.
SparseOperator build_hamiltonian(const LevelScheme& scheme, const CavityConfig& cavity,
                                 double delta_lc);

/// sqrt(2 kappa) a for every mode plus the spontaneous-emission channels.
std::vector<CollapseOperator> build_collapse_operators(const LevelScheme& scheme,
                                                       const CavityConfig& cavity,
                                                       const DecayOptions& decay = {});

/// Column-stacked Liouvillian: vec(L rho) = L vec(rho). Throws
/// std::domain_error for negative rates or mismatched dimensions.
SparseOperator build_liouvillian(const SparseOperator& hamiltonian,
                                 const std::vector<CollapseOperator>& collapse);

/// Row vector t with t . vec(rho) = tr(rho).
Eigen::RowVectorXcd trace_functional(std::size_t dimension);

struct DensityOperator {
  Eigen::MatrixXcd matrix;

  Complex trace() const { return matrix.trace(); }
  Complex expectation(const SparseOperator& op) const;  // tr(rho op)
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct SteadyStateOptions {
  double relative_tolerance = 1e-9;  // on ||L rho|| / ||L||
  int refinement_steps = 3;
};

/// Kernel of L normalized to unit trace: one row of L is replaced by the
/// trace constraint and the system is solved by sparse LU, followed by
/// iterative refinement. Throws SolverError if the residual stays above
/// tolerance.
DensityOperator steady_state(const SparseOperator& liouvillian, const SteadyStateOptions& options = {});

/// Relative residual ||L vec(rho)|| / ||L|| (Frobenius norm for L).
double steady_state_residual(const SparseOperator& liouvillian, const DensityOperator& rho);

struct TwoLevelResponse {
  Complex amplitude;    // <a> in the frame of build_hamiltonian
  double transmission;  // |<a>|^2 normalized to the empty-cavity peak
  double reflection;    // symmetric lossless mirrors
};

/// Weak-drive linear response of a two-level atom in a single mode.
/// delta_c and delta_a are cavity and atom frequencies minus the drive
/// frequency; gamma is the dipole decay rate.
TwoLevelResponse analytic_two_level(double g, double kappa, double gamma, double delta_c,
                                    double delta_a, double eps);

struct SpectrumPoint {
  double delta_lc = 0.0;  // rad/s
  double transmission_rel = 0.0;
  double reflection_rel = 0.0;
};

struct SpectrumOptions {
  double ground_reset_rate = 2.0 * mhz_to_rad(rb87::kGammaMhz);
  unsigned workers = 1;
  SteadyStateOptions solver;
};

/// Uniform distribution over the ground sublevels of the scheme.
std::vector<double> uniform_ground_population(const LevelScheme& scheme);

/// Incoherent mixture of per-sublevel steady states weighted by
/// `ground_population` (one weight per entry of scheme.ground_levels()).
DensityOperator mixture_steady_state(const LevelScheme& scheme, const CavityConfig& cavity,
                                     double delta_lc, const std::vector<double>& ground_population,
                                     const SpectrumOptions& options = {});

/// Driven-mode transmission and reflection per detuning, normalized to the
/// empty cavity on resonance. Points are solved independently and returned
/// in input order.
std::vector<SpectrumPoint> spectrum(const LevelScheme& scheme, const CavityConfig& cavity,
                                    const std::vector<double>& ground_population,
                                    const std::vector<double>& detunings,
                                    const SpectrumOptions& options = {});

enum class SpectrumResidual { transmission, amplitude };

/// Sum of squared differences between a computed spectrum and measured
/// transmission values at the same detunings; `amplitude` compares square
/// roots of the transmissions.
double spectrum_residual(const std::vector<SpectrumPoint>& model,
                         const std::vector<double>& measured_transmission, SpectrumResidual kind);

std::string spectrum_csv(const std::vector<SpectrumPoint>& points);

}  // namespace cavread
