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

#include <cstdint>
#include <utility>
#include <vector>

namespace cavread {

/// log P(X = k) for X ~ Poisson(mean); handles mean = 0.
double poisson_log_pmf(std::int64_t k, double mean);

/// P(X = k) for k = 0..cap.
std::vector<double> poisson_pmf_table(double mean, std::int64_t cap);

/// P(X <= k), summed term by term from the mode outward so that small
/// lower tails keep full relative precision.
double poisson_cdf(std::int64_t k, double mean);

/// P(X > k), summed directly over the upper tail.
double poisson_upper_tail(std::int64_t k, double mean);

/// Smallest cap >= ceil(mean + 12 sqrt(mean)) whose upper tail is below
/// `tail_bound`.
std::int64_t poisson_cap(double mean, double tail_bound = 1e-12);

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

}  // namespace cavread
