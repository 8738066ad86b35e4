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

#include "cavread/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cavread {

double poisson_log_pmf(std::int64_t k, double mean) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

std::vector<double> poisson_pmf_table(double mean, std::int64_t cap) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson_pmf_table: negative mean");
  std::vector<double> out(static_cast<std::size_t>(cap + 1));
  for (std::int64_t k = 0; k <= cap; ++k) out[static_cast<std::size_t>(k)] = std::exp(poisson_log_pmf(k, mean));
  return out;
}

double poisson_cdf(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return 1.0;
  // Sum from k downward: terms decrease away from k when k is below the mode.
  double sum = 0.0;
  for (std::int64_t j = k; j >= 0; --j) {
    const double term = std::exp(poisson_log_pmf(j, mean));
    sum += term;
    if (static_cast<double>(j) < mean && term < sum * 1e-18) break;
  }
  return std::min(1.0, sum);
}

double poisson_upper_tail(std::int64_t k, double mean) {
  if (k < 0) return 1.0;
  if (mean == 0.0) return 0.0;
  double sum = 0.0;
  for (std::int64_t j = k + 1;; ++j) {
    const double term = std::exp(poisson_log_pmf(j, mean));
    sum += term;
    if (static_cast<double>(j) > mean && term < sum * 1e-18) break;
    if (term == 0.0 && static_cast<double>(j) > mean) break;
  }
  return sum;
}

std::int64_t poisson_cap(double mean, double tail_bound) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::domain_error("poisson_cap: invalid mean");
  auto cap = static_cast<std::int64_t>(std::ceil(mean + 12.0 * std::sqrt(mean)));
  while (poisson_upper_tail(cap, mean) >= tail_bound) ++cap;
  return cap;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::domain_error("gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      derivative = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    derivative = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace cavread
