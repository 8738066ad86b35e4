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

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "cavread/angular.hpp"

using cavread::clebsch_gordan;
using cavread::wigner_6j;

namespace {

// Coupled states built from scratch: the stretched state of each J is the
// vector in the M = J product subspace orthogonal to all higher J, with a
// positive <j1 j1; j2 J-j1> component; lower M follow by applying J-.
// Everything works in doubled quantum numbers.
class LadderOracle {
 public:
  LadderOracle(int tj1, int tj2) : tj1_(tj1), tj2_(tj2) {
    for (int tJ = tj1 + tj2; tJ >= std::abs(tj1 - tj2); tJ -= 2) {
      State top = stretched(tJ);
      states_[{tJ, tJ}] = top;
      State cur = top;
      for (int tM = tJ; tM > -tJ; tM -= 2) {
        cur = lower(cur);
        // J- |J M> = sqrt((J+M)(J-M+1)) |J M-1>
        const double J = tJ / 2.0, M = tM / 2.0;
        const double norm = std::sqrt((J + M) * (J - M + 1.0));
        for (auto& [k, v] : cur) v /= norm;
        states_[{tJ, tM - 2}] = cur;
      }
    }
  }

  double cg(int tm1, int tm2, int tJ, int tM) const {
    const auto it = states_.find({tJ, tM});
    if (it == states_.end()) return 0.0;
    const auto jt = it->second.find({tm1, tm2});
    return jt == it->second.end() ? 0.0 : jt->second;
  }

 private:
  using State = std::map<std::pair<int, int>, double>;

  State stretched(int tJ) {
    State v;
    for (int tm1 = -tj1_; tm1 <= tj1_; tm1 += 2) {
      const int tm2 = tJ - tm1;
      if (std::abs(tm2) <= tj2_) v[{tm1, tm2}] = 0.0;
    }
    // Start from |j1 j1> |j2 J-j1> and orthogonalize against higher J.
    v[{tj1_, tJ - tj1_}] = 1.0;
    for (int higher = tj1_ + tj2_; higher > tJ; higher -= 2) {
      const State& u = states_.at({higher, tJ});
      double overlap = 0.0;
      for (const auto& [k, x] : v) overlap += x * value(u, k);
      for (auto& [k, x] : v) x -= overlap * value(u, k);
    }
    double norm = 0.0;
    for (const auto& [k, x] : v) norm += x * x;
    norm = std::sqrt(norm);
    const double sign = v[{tj1_, tJ - tj1_}] >= 0 ? 1.0 : -1.0;
    for (auto& [k, x] : v) x *= sign / norm;
    return v;
  }

  State lower(const State& in) const {
    State out;
    for (const auto& [k, x] : in) {
      const auto [tm1, tm2] = k;
      const double j1 = tj1_ / 2.0, m1 = tm1 / 2.0, j2 = tj2_ / 2.0, m2 = tm2 / 2.0;
      if (tm1 > -tj1_) out[{tm1 - 2, tm2}] += x * std::sqrt((j1 + m1) * (j1 - m1 + 1.0));
      if (tm2 > -tj2_) out[{tm1, tm2 - 2}] += x * std::sqrt((j2 + m2) * (j2 - m2 + 1.0));
    }
    return out;
  }

  static double value(const State& s, const std::pair<int, int>& k) {
    const auto it = s.find(k);
    return it == s.end() ? 0.0 : it->second;
  }

  int tj1_, tj2_;
  std::map<std::pair<int, int>, State> states_;
};

}  // namespace

TEST_CASE("trivial coefficients") {
  CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0);  // m1 + m2 != M
  CHECK(clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0);  // outside the triangle
}

TEST_CASE("<1 0; 1 0 | 2 0> from two routes") {
  // Explicit Racah sum (library) against the ladder construction.
  const LadderOracle ladder(2, 2);
  const double racah = clebsch_gordan(1, 0, 1, 0, 2, 0);
  CHECK(std::abs(racah - ladder.cg(0, 0, 4, 0)) <= 1e-12);
  CHECK(std::abs(racah - std::sqrt(2.0 / 3.0)) <= 1e-12);
}

TEST_CASE("invalid arguments throw") {
  CHECK_THROWS_AS(clebsch_gordan(0.3, 0, 1, 0, 1, 0), std::domain_error);
  CHECK_THROWS_AS(clebsch_gordan(1, 2, 1, 0, 2, 2), std::domain_error);
  CHECK_THROWS_AS(clebsch_gordan(1, 0.5, 1, 0, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(clebsch_gordan(-1, 0, 1, 0, 1, 0), std::domain_error);
}

TEST_CASE("Racah sum agrees with the ladder construction for j <= 3") {
  double worst = 0.0;
  for (int tj1 = 0; tj1 <= 6; ++tj1) {
    for (int tj2 = 0; tj2 <= 6; ++tj2) {
      const LadderOracle ladder(tj1, tj2);
      for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
        for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
          for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2) {
            const int tM = tm1 + tm2;
            if (std::abs(tM) > tJ) continue;
            const double a = clebsch_gordan(tj1 / 2.0, tm1 / 2.0, tj2 / 2.0, tm2 / 2.0, tJ / 2.0, tM / 2.0);
            worst = std::max(worst, std::abs(a - ladder.cg(tm1, tm2, tJ, tM)));
          }
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("three-term recursion holds") {
  // sqrt((J-M)(J+M+1)) <m1 m2|J M+1> = sqrt((j1-m1+1)(j1+m1)) <m1-1 m2|J M>
  //                                  + sqrt((j2-m2+1)(j2+m2)) <m1 m2-1|J M>
  double worst = 0.0;
  for (double j1 : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (double j2 : {0.5, 1.0, 2.5}) {
      for (double J = std::abs(j1 - j2); J <= j1 + j2; J += 1.0) {
        for (double m1 = -j1; m1 <= j1; m1 += 1.0) {
          for (double m2 = -j2; m2 <= j2; m2 += 1.0) {
            const double M = m1 + m2 - 1.0;
            if (std::abs(M) > J || std::abs(M + 1.0) > J) continue;
            const double lhs = std::sqrt((J - M) * (J + M + 1.0)) * clebsch_gordan(j1, m1, j2, m2, J, M + 1.0);
            double rhs = 0.0;
            if (m1 - 1.0 >= -j1) rhs += std::sqrt((j1 - m1 + 1.0) * (j1 + m1)) * clebsch_gordan(j1, m1 - 1.0, j2, m2, J, M);
            if (m2 - 1.0 >= -j2) rhs += std::sqrt((j2 - m2 + 1.0) * (j2 + m2)) * clebsch_gordan(j1, m1, j2, m2 - 1.0, J, M);
            worst = std::max(worst, std::abs(lhs - rhs));
          }
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("orthogonality for j1, j2 up to 3") {
  double worst = 0.0;
  for (int tj1 = 0; tj1 <= 6; ++tj1) {
    for (int tj2 = 0; tj2 <= 6; ++tj2) {
      for (int a1 = -tj1; a1 <= tj1; a1 += 2) {
        for (int a2 = -tj2; a2 <= tj2; a2 += 2) {
          for (int b1 = -tj1; b1 <= tj1; b1 += 2) {
            for (int b2 = -tj2; b2 <= tj2; b2 += 2) {
              double sum = 0.0;
              for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
                for (int tM = -tJ; tM <= tJ; tM += 2) {
                  sum += clebsch_gordan(tj1 / 2.0, a1 / 2.0, tj2 / 2.0, a2 / 2.0, tJ / 2.0, tM / 2.0) *
                         clebsch_gordan(tj1 / 2.0, b1 / 2.0, tj2 / 2.0, b2 / 2.0, tJ / 2.0, tM / 2.0);
                }
              }
              const double expected = (a1 == b1 && a2 == b2) ? 1.0 : 0.0;
              worst = std::max(worst, std::abs(sum - expected));
            }
          }
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("6j symbols: closed forms and orthogonality") {
  // {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
  CHECK(wigner_6j(1, 1, 1, 0, 1, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
  CHECK(wigner_6j(2, 1.5, 0.5, 0, 0.5, 1.5) == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-13));
  // sum_x (2x+1)(2f+1) {a b x; c d f}{a b x; c d f'} = delta_ff'
  const double a = 1.5, b = 1.0, c = 1.0, d = 1.5;
  for (double f = 0.0; f <= 2.0; f += 1.0) {
    for (double g = 0.0; g <= 2.0; g += 1.0) {
      double sum = 0.0;
      for (double x = 0.5; x <= 2.5; x += 1.0) sum += (2 * x + 1) * (2 * f + 1) * wigner_6j(a, b, x, c, d, f) * wigner_6j(a, b, x, c, d, g);
      CHECK(std::abs(sum - (f == g ? 1.0 : 0.0)) <= 1e-12);
    }
  }
}
