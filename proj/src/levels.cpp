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

#include "cavread/levels.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cavread/document.hpp"

namespace cavread {
namespace {

constexpr double kTolerance = 1e-12;

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string level_label(Manifold manifold, Spin F, Spin m) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g,m=%+g", manifold == Manifold::ground ? "F" : "F'",
                F.value(), m.value());
  return buf;
}

Polarization polarization_of(int delta_m) {
  switch (delta_m) {
    case -1: return Polarization::sigma_minus;
    case 0: return Polarization::pi;
    case 1: return Polarization::sigma_plus;
  }
  throw std::invalid_argument("no dipole polarization for delta m = " + std::to_string(delta_m));
}

}  // namespace

namespace rb87 {

double relative_dipole(Spin F, Spin m, Spin Fp, Spin mp) {
  const double J = 0.5, Jp = 1.5, I = 1.5;
  const int q2 = mp.twice - m.twice;
  if (std::abs(q2) > 2) return 0.0;
  const double six_j = wigner_6j(J, Jp, 1.0, Fp.value(), F.value(), I);
  if (six_j == 0.0) return 0.0;
  const double cg = clebsch_gordan(F, m, Spin{2}, Spin{q2}, Fp, mp);
  const int phase_exponent = static_cast<int>(std::lround(Fp.value() + J + 1.0 + I));
  const double phase = (phase_exponent % 2 == 0) ? 1.0 : -1.0;
  return phase * std::sqrt((2.0 * F.value() + 1.0) * (2.0 * Jp + 1.0)) * six_j * cg;
}

}  // namespace rb87

double LevelScheme::reference_frequency() const {
  return levels.at(reference_excited).energy - levels.at(reference_ground).energy;
}

std::size_t LevelScheme::find(Manifold manifold, double F, double m) const {
  const Spin f = Spin::from(F), mm = Spin::from(m);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].manifold == manifold && levels[i].F == f && levels[i].m == mm) return i;
  }
  throw std::out_of_range("no level " + level_label(manifold, f, mm) + " in scheme");
}

const Transition& LevelScheme::transition(std::size_t ground, std::size_t excited) const {
  for (const auto& t : transitions) {
    if (t.ground == ground && t.excited == excited) return t;
  }
  throw std::out_of_range("no transition between levels " + std::to_string(ground) + " and " +
                          std::to_string(excited));
}

std::vector<std::size_t> LevelScheme::ground_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].manifold == Manifold::ground) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> LevelScheme::excited_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].manifold == Manifold::excited) out.push_back(i);
  }
  return out;
}

void LevelScheme::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("level scheme: gamma must be positive and finite");
  }
  if (external_branching.size() != levels.size()) {
    throw std::invalid_argument("level scheme: external_branching size mismatch");
  }
  for (const auto& level : levels) {
    if (!std::isfinite(level.energy)) {
      throw std::invalid_argument("level scheme: non-finite energy for " + level.label);
    }
  }
  if (reference_ground >= levels.size() || reference_excited >= levels.size() ||
      levels[reference_ground].manifold != Manifold::ground ||
      levels[reference_excited].manifold != Manifold::excited) {
    throw std::invalid_argument("level scheme: invalid reference transition");
  }
  std::vector<double> branching = external_branching;
  for (const auto& t : transitions) {
    if (t.ground >= levels.size() || t.excited >= levels.size() ||
        levels[t.ground].manifold != Manifold::ground ||
        levels[t.excited].manifold != Manifold::excited) {
      throw std::invalid_argument("level scheme: transition endpoints out of range");
    }
    const int delta_m2 = levels[t.excited].m.twice - levels[t.ground].m.twice;
    if (delta_m2 != 2 * static_cast<int>(t.polarization)) {
      throw std::invalid_argument("level scheme: polarization does not match delta m for " +
                                  levels[t.ground].label + " -> " + levels[t.excited].label);
    }
    if (std::abs(t.relative_dipole) > 1.0 + kTolerance) {
      throw std::invalid_argument("level scheme: relative dipole outside [-1, 1]");
    }
    branching[t.excited] += t.relative_dipole * t.relative_dipole;
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].manifold == Manifold::excited && std::abs(branching[i] - 1.0) > 1e-9) {
      throw std::invalid_argument("level scheme: branching of " + levels[i].label +
                                  " sums to " + std::to_string(branching[i]));
    }
  }
}

std::string LevelScheme::to_text() const {
  Document doc;
  auto& head = doc.add_section("scheme");
  head.set("gamma_rad_s", exact(gamma));
  head.set("reference_ground", std::to_string(reference_ground));
  head.set("reference_excited", std::to_string(reference_excited));
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    auto& s = doc.add_section("level");
    s.set("label", l.label);
    s.set("twice_f", std::to_string(l.F.twice));
    s.set("twice_m", std::to_string(l.m.twice));
    s.set("energy_rad_s", exact(l.energy));
    s.set("manifold", l.manifold == Manifold::ground ? "ground" : "excited");
    s.set("external_branching", exact(external_branching[i]));
  }
  for (const auto& t : transitions) {
    auto& s = doc.add_section("transition");
    s.set("ground", std::to_string(t.ground));
    s.set("excited", std::to_string(t.excited));
    s.set("polarization", std::to_string(static_cast<int>(t.polarization)));
    s.set("relative_dipole", exact(t.relative_dipole));
  }
  return doc.render();
}

LevelScheme LevelScheme::from_text(const std::string& text) {
  const Document doc = Document::parse(text);
  LevelScheme scheme;
  auto require = [](const DocumentSection& s, const char* key) -> const DocumentEntry& {
    const auto* e = s.find(key);
    if (!e) throw ConfigError(std::string("missing key '") + key + "'", s.line);
    return *e;
  };
  bool have_head = false;
  for (const auto& s : doc.sections) {
    if (s.name == "scheme") {
      scheme.gamma = parse_double(require(s, "gamma_rad_s"));
      scheme.reference_ground = static_cast<std::size_t>(parse_integer(require(s, "reference_ground")));
      scheme.reference_excited = static_cast<std::size_t>(parse_integer(require(s, "reference_excited")));
      have_head = true;
    } else if (s.name == "level") {
      Level l;
      l.label = require(s, "label").value;
      l.F = Spin{static_cast<int>(parse_integer(require(s, "twice_f")))};
      l.m = Spin{static_cast<int>(parse_integer(require(s, "twice_m")))};
      l.energy = parse_double(require(s, "energy_rad_s"));
      const auto& manifold = require(s, "manifold");
      if (manifold.value != "ground" && manifold.value != "excited") {
        throw ConfigError("manifold must be ground or excited", manifold.line);
      }
      l.manifold = manifold.value == "ground" ? Manifold::ground : Manifold::excited;
      scheme.levels.push_back(l);
      scheme.external_branching.push_back(parse_double(require(s, "external_branching")));
    } else if (s.name == "transition") {
      Transition t;
      t.ground = static_cast<std::size_t>(parse_integer(require(s, "ground")));
      t.excited = static_cast<std::size_t>(parse_integer(require(s, "excited")));
      t.polarization = polarization_of(static_cast<int>(parse_integer(require(s, "polarization"))));
      t.relative_dipole = parse_double(require(s, "relative_dipole"));
      scheme.transitions.push_back(t);
    } else {
      throw ConfigError("unknown section '" + s.name + "'", s.line);
    }
  }
  if (!have_head) throw ConfigError("missing [scheme] section");
  scheme.validate();
  return scheme;
}

LevelScheme build_two_level(double gamma) {
  LevelScheme scheme;
  scheme.gamma = gamma;
  scheme.levels.push_back({level_label(Manifold::ground, Spin{4}, Spin{4}), Spin{4}, Spin{4}, 0.0,
                           Manifold::ground});
  scheme.levels.push_back({level_label(Manifold::excited, Spin{6}, Spin{6}), Spin{6}, Spin{6}, 0.0,
                           Manifold::excited});
  scheme.external_branching = {0.0, 0.0};
  scheme.transitions.push_back({0, 1, Polarization::sigma_plus, 1.0});
  scheme.reference_ground = 0;
  scheme.reference_excited = 1;
  scheme.validate();
  return scheme;
}

LevelScheme build_rb87_d2(double field_gauss, double light_shift, double gamma) {
  if (!(field_gauss >= 0.0)) throw std::invalid_argument("build_rb87_d2: field must be >= 0");
  const double zeeman_per_gauss = mhz_to_rad(rb87::kBohrMagnetonMhzPerGauss) * field_gauss;

  LevelScheme scheme;
  scheme.gamma = gamma;
  for (int m = -2; m <= 2; ++m) {
    const Spin F{4}, mm{2 * m};
    scheme.levels.push_back({level_label(Manifold::ground, F, mm), F, mm,
                             m * rb87::kGroundGFactor[2] * zeeman_per_gauss, Manifold::ground});
  }
  for (int Fp = 1; Fp <= 3; ++Fp) {
    for (int m = -Fp; m <= Fp; ++m) {
      const Spin F{2 * Fp}, mm{2 * m};
      const double energy = mhz_to_rad(rb87::kExcitedOffsetMhz[Fp]) +
                            m * rb87::kExcitedGFactor[Fp] * zeeman_per_gauss + light_shift;
      scheme.levels.push_back({level_label(Manifold::excited, F, mm), F, mm, energy,
                               Manifold::excited});
    }
  }
  scheme.external_branching.assign(scheme.levels.size(), 0.0);

  for (std::size_t e = 0; e < scheme.levels.size(); ++e) {
    const auto& ex = scheme.levels[e];
    if (ex.manifold != Manifold::excited) continue;
    for (std::size_t g = 0; g < scheme.levels.size(); ++g) {
      const auto& gr = scheme.levels[g];
      if (gr.manifold != Manifold::ground) continue;
      const int delta_m = (ex.m.twice - gr.m.twice) / 2;
      if (std::abs(delta_m) > 1) continue;
      const double d = rb87::relative_dipole(gr.F, gr.m, ex.F, ex.m);
      if (d == 0.0) continue;
      scheme.transitions.push_back({g, e, polarization_of(delta_m), d});
    }
    // Decay into the F=1 ground manifold, which the scheme does not carry.
    double external = 0.0;
    for (int m = -1; m <= 1; ++m) {
      const double d = rb87::relative_dipole(Spin{2}, Spin{2 * m}, ex.F, ex.m);
      external += d * d;
    }
    scheme.external_branching[e] = external;
  }
  scheme.reference_ground = scheme.find(Manifold::ground, 2, 0);
  scheme.reference_excited = scheme.find(Manifold::excited, 3, 0);
  scheme.validate();
  return scheme;
}

double coupling_strength(const LevelScheme& scheme, double g0, std::size_t ground,
                         std::size_t excited) {
  return g0 * scheme.transition(ground, excited).relative_dipole;
}

double dispersive_shift(double g_eff, double detuning) {
  if (detuning == 0.0) throw std::domain_error("dispersive_shift: zero detuning");
  return g_eff * g_eff / detuning;
}

double rb87_f1_dispersive_shift(double g0, int m, bool pi_mode, double cavity_offset) {
  if (std::abs(m) > 1) throw std::domain_error("rb87_f1_dispersive_shift: |m| > 1");
  double shift = 0.0;
  for (int Fp = 0; Fp <= 3; ++Fp) {
    for (int q = -1; q <= 1; ++q) {
      if (pi_mode != (q == 0)) continue;
      const int mp = m + q;
      if (std::abs(mp) > Fp) continue;
      const double d = rb87::relative_dipole(Spin{2}, Spin{2 * m}, Spin{2 * Fp}, Spin{2 * mp});
      if (d == 0.0) continue;
      const double weight = pi_mode ? 1.0 : 1.0 / std::sqrt(2.0);
      // F=1 -> F' lies one ground splitting above F=2 -> F'=3, less the F' offset.
      const double transition =
          mhz_to_rad(rb87::kGroundSplittingMhz + rb87::kExcitedOffsetMhz[Fp]);
      shift += dispersive_shift(g0 * weight * d, cavity_offset - transition);
    }
  }
  return shift;
}

}  // namespace cavread
