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

#include "cavread/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cavread {
namespace {

// log(n!) for the half-sum arguments below; all are non-negative integers.
double log_factorial(int n) { return std::lgamma(n + 1.0); }

bool is_valid_projection(Spin j, Spin m) {
  return j.twice >= 0 && std::abs(m.twice) <= j.twice && (j.twice - m.twice) % 2 == 0;
}

bool triangle(Spin a, Spin b, Spin c) {
  return c.twice >= std::abs(a.twice - b.twice) && c.twice <= a.twice + b.twice &&
         (a.twice + b.twice + c.twice) % 2 == 0;
}

// log of the triangle coefficient Delta(abc).
double log_delta(Spin a, Spin b, Spin c) {
  const int s = (a.twice + b.twice + c.twice) / 2;
  return log_factorial((a.twice + b.twice - c.twice) / 2) +
         log_factorial((a.twice - b.twice + c.twice) / 2) +
         log_factorial((-a.twice + b.twice + c.twice) / 2) - log_factorial(s + 1);
}

}  // namespace

Spin Spin::from(double j) {
  const double twice = 2.0 * j;
  const double rounded = std::round(twice);
  if (!std::isfinite(j) || std::abs(twice - rounded) > 1e-9) {
    throw std::domain_error("angular momentum " + std::to_string(j) + " is not a half-integer");
  }
  return Spin{static_cast<int>(rounded)};
}

double clebsch_gordan(Spin j1, Spin m1, Spin j2, Spin m2, Spin J, Spin M) {
  if (!is_valid_projection(j1, m1) || !is_valid_projection(j2, m2) || !is_valid_projection(J, M)) {
    throw std::domain_error("clebsch_gordan: invalid angular momentum arguments");
  }
  if (m1.twice + m2.twice != M.twice || !triangle(j1, j2, J)) {
    return 0.0;
  }

  // Integer-valued combinations appearing in the Racah formula.
  const int a = (j1.twice + j2.twice - J.twice) / 2;
  const int b = (j1.twice - m1.twice) / 2;
  const int c = (j2.twice + m2.twice) / 2;
  const int d = (J.twice - j2.twice + m1.twice) / 2;
  const int e = (J.twice - j1.twice - m2.twice) / 2;

  const double log_prefactor =
      0.5 * (std::log(J.twice + 1.0) + log_factorial((J.twice + j1.twice - j2.twice) / 2) +
             log_factorial((J.twice - j1.twice + j2.twice) / 2) + log_factorial(a) -
             log_factorial((j1.twice + j2.twice + J.twice) / 2 + 1) +
             log_factorial((J.twice + M.twice) / 2) + log_factorial((J.twice - M.twice) / 2) +
             log_factorial((j1.twice - m1.twice) / 2) + log_factorial((j1.twice + m1.twice) / 2) +
             log_factorial((j2.twice - m2.twice) / 2) + log_factorial((j2.twice + m2.twice) / 2));

  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double log_term = log_factorial(k) + log_factorial(a - k) + log_factorial(b - k) +
                            log_factorial(c - k) + log_factorial(d + k) + log_factorial(e + k);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::exp(log_prefactor - log_term);
  }
  return sum;
}

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
  return clebsch_gordan(Spin::from(j1), Spin::from(m1), Spin::from(j2), Spin::from(m2),
                        Spin::from(J), Spin::from(M));
}

double wigner_6j(double j1d, double j2d, double j3d, double j4d, double j5d, double j6d) {
  const Spin j1 = Spin::from(j1d), j2 = Spin::from(j2d), j3 = Spin::from(j3d);
  const Spin j4 = Spin::from(j4d), j5 = Spin::from(j5d), j6 = Spin::from(j6d);
  for (Spin s : {j1, j2, j3, j4, j5, j6}) {
    if (s.twice < 0) throw std::domain_error("wigner_6j: negative angular momentum");
  }
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3)) {
    return 0.0;
  }
  const double log_deltas =
      log_delta(j1, j2, j3) + log_delta(j1, j5, j6) + log_delta(j4, j2, j6) + log_delta(j4, j5, j3);

  const int t1 = (j1.twice + j2.twice + j3.twice) / 2;
  const int t2 = (j1.twice + j5.twice + j6.twice) / 2;
  const int t3 = (j4.twice + j2.twice + j6.twice) / 2;
  const int t4 = (j4.twice + j5.twice + j3.twice) / 2;
  const int u1 = (j1.twice + j2.twice + j4.twice + j5.twice) / 2;
  const int u2 = (j2.twice + j3.twice + j5.twice + j6.twice) / 2;
  const int u3 = (j3.twice + j1.twice + j6.twice + j4.twice) / 2;

  const int k_min = std::max({t1, t2, t3, t4});
  const int k_max = std::min({u1, u2, u3});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double log_term = log_factorial(k + 1) - log_factorial(k - t1) - log_factorial(k - t2) -
                            log_factorial(k - t3) - log_factorial(k - t4) - log_factorial(u1 - k) -
                            log_factorial(u2 - k) - log_factorial(u3 - k);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * std::exp(0.5 * log_deltas + log_term);
  }
  return sum;
}

}  // namespace cavread
