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

namespace cavread {

/// Angular momentum quantum number stored as twice its value so that
/// half-integers are exact.
struct Spin {
  int twice = 0;

  static Spin from(double j);  // throws std::domain_error unless 2j is integral
  double value() const { return 0.5 * twice; }
  friend bool operator==(Spin, Spin) = default;
};

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.
/// Explicit Racah sum. Arguments that are not valid angular momenta
/// (non half-integral, |m| > j, m and j of different parity) throw
/// std::domain_error; selection-rule violations return 0.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);
double clebsch_gordan(Spin j1, Spin m1, Spin j2, Spin m2, Spin J, Spin M);

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah formula.
double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6);

}  // namespace cavread
