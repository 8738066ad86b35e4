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

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "cavread/angular.hpp"

namespace cavread {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/s.
constexpr double mhz_to_rad(double mhz) { return kTwoPi * 1e6 * mhz; }
constexpr double rad_to_mhz(double rad) { return rad / (kTwoPi * 1e6); }

namespace rb87 {
inline constexpr double kBohrMagnetonMhzPerGauss = 1.39962449361;
inline constexpr double kGroundSplittingMhz = 6834.682610904;
inline constexpr double kGammaMhz = 3.0;  // dipole (half-width) decay rate
// Excited-state hyperfine offsets relative to F'=3.
inline constexpr double kExcitedOffsetMhz[4] = {-495.8, -423.597, -266.650, 0.0};
inline constexpr double kGroundGFactor[3] = {0.0, -0.5, 0.5};     // indexed by F
inline constexpr double kExcitedGFactor[4] = {0.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};

/// Signed D2 dipole coefficient between |F m> and |F' m'>, normalized so that
/// the squared coefficients from one excited sublevel to all ground
/// sublevels of both hyperfine manifolds sum to 1. The cycling transition
/// |2,2> -> |3,3> has coefficient 1.
double relative_dipole(Spin F, Spin m, Spin Fp, Spin mp);
}  // namespace rb87

enum class Manifold { ground, excited };

/// Photon polarization relative to the quantization axis, valued as
/// m(excited) - m(ground).
enum class Polarization { sigma_minus = -1, pi = 0, sigma_plus = 1 };

struct Level {
  std::string label;
  Spin F;
  Spin m;
  double energy = 0.0;  // rad/s, relative to the bare reference transition
  Manifold manifold = Manifold::ground;
};

struct Transition {
  std::size_t ground = 0;
  std::size_t excited = 0;
  Polarization polarization = Polarization::pi;
  double relative_dipole = 0.0;
};

/// Atomic levels, their allowed dipole transitions, and the decay rate.
///
/// Energies are angular-frequency offsets; excited energies are measured
/// from the optical frequency of the bare reference transition, so the
/// (light-shifted) reference transition frequency is
/// `levels[reference_excited].energy - levels[reference_ground].energy`.
/// `external_branching[i]` is the squared dipole weight from excited level
/// `i` to ground sublevels not represented in the scheme (zero for ground
/// levels).
struct LevelScheme {
  std::vector<Level> levels;
  std::vector<Transition> transitions;
  std::vector<double> external_branching;
  double gamma = mhz_to_rad(rb87::kGammaMhz);
  std::size_t reference_ground = 0;
  std::size_t reference_excited = 0;

  std::size_t size() const { return levels.size(); }
  double reference_frequency() const;

  std::size_t find(Manifold manifold, double F, double m) const;  // throws std::out_of_range
  const Transition& transition(std::size_t ground, std::size_t excited) const;  // throws std::out_of_range
  std::vector<std::size_t> ground_levels() const;
  std::vector<std::size_t> excited_levels() const;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  std::string to_text() const;
  static LevelScheme from_text(const std::string& text);
};

/// |g> = |F=2,m=2>, |e> = |F'=3,m'=3> joined by the sigma+ cycling transition.
LevelScheme build_two_level(double gamma = mhz_to_rad(rb87::kGammaMhz));

/// F=2 ground and F'=1,2,3 excited manifolds of the 87Rb D2 line with linear
/// Zeeman shifts at `field_gauss` and a scalar light shift (rad/s) added to
/// every excited level.
LevelScheme build_rb87_d2(double field_gauss, double light_shift,
                          double gamma = mhz_to_rad(rb87::kGammaMhz));

/// g0 times the relative dipole of the ground->excited transition.
double coupling_strength(const LevelScheme& scheme, double g0, std::size_t ground,
                         std::size_t excited);

/// Cavity resonance shift g_eff^2 / detuning per atom, where detuning is
/// cavity minus atomic transition frequency. Throws std::domain_error on a
/// zero detuning.
double dispersive_shift(double g_eff, double detuning);

/// Summed dispersive shift of one cavity mode produced by an atom in
/// |F=1, m>. The cavity sits at the |2,0> -> |3,0> reference frequency plus
/// `cavity_offset` (rad/s); every F=1 -> F' transition is detuned by the
/// ground hyperfine splitting less the excited offset. `pi_mode` selects the
/// pi-polarized mode; otherwise the orthogonal linear mode with sigma+/-
/// weights 1/sqrt(2).
double rb87_f1_dispersive_shift(double g0, int m, bool pi_mode = true, double cavity_offset = 0.0);

}  // namespace cavread
