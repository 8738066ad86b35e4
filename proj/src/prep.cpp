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

#include "cavread/prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cavread/document.hpp"
#include "cavread/parallel.hpp"
#include "cavread/rng.hpp"
#include "cavread/stats.hpp"

namespace cavread {

void PrepModel::validate() const {
  if (!(n_bar > 0.0)) throw std::invalid_argument("prep: n_bar must be > 0");
  if (!(p_transfer >= 0.0 && p_transfer <= 1.0)) throw std::invalid_argument("prep: p_transfer must lie in [0, 1]");
  if (max_pulses < 1) throw std::invalid_argument("prep: max_pulses must be >= 1");
  if (!(lambda_low >= 0.0 && lambda_low < lambda_high)) {
    throw std::invalid_argument("prep: need 0 <= lambda_low < lambda_high");
  }
  if (count_threshold < 0) throw std::invalid_argument("prep: count_threshold must be >= 0");
  if (n_cap < 0) throw std::invalid_argument("prep: n_cap must be >= 0");
}

double pulse_success_prob(int n, double p) {
  if (n < 0) throw std::domain_error("pulse_success_prob: negative atom number");
  if (n == 0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(n * std::log1p(-p));
}

std::vector<double> reservoir_weights(const PrepModel& model) {
  model.validate();
  // Normalize in log space so a mean far above the cap does not underflow.
  std::vector<double> w(static_cast<std::size_t>(model.n_cap) + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= model.n_cap; ++n) {
    w[n] = poisson_log_pmf(n, model.n_bar);
    top = std::max(top, w[n]);
  }
  double total = 0.0;
  for (double& x : w) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

PulseDistribution pulses_pmf(const PrepModel& model) {
  const auto w = reservoir_weights(model);
  PulseDistribution d;
  d.pmf.assign(static_cast<std::size_t>(model.max_pulses) + 1, 0.0);
  for (int n = 0; n <= model.n_cap; ++n) {
    const double ps = pulse_success_prob(n, model.p_transfer);
    double survive = 1.0;
    for (int k = 1; k <= model.max_pulses; ++k) {
      d.pmf[k] += w[n] * survive * ps;
      survive *= 1.0 - ps;
    }
    d.discard += w[n] * survive;
  }
  double mass = 0.0, first_moment = 0.0;
  for (int k = 1; k <= model.max_pulses; ++k) {
    mass += d.pmf[k];
    first_moment += k * d.pmf[k];
  }
  d.mean_pulses = mass > 0.0 ? first_moment / mass : 0.0;
  return d;
}

double multi_atom_prob(const PrepModel& model) {
  const auto w = reservoir_weights(model);
  const double p = model.p_transfer;
  double multi = 0.0, success = 0.0;
  for (int n = 1; n <= model.n_cap; ++n) {
    const double ps = pulse_success_prob(n, p);
    if (ps == 0.0) continue;
    // Every pulse is independent, so the transfer count of the first
    // successful pulse is Binomial(n, p) conditioned on k >= 1.
    const double single = n * p * std::pow(1.0 - p, n - 1);
    const double reached = -std::expm1(model.max_pulses * std::log1p(-ps));
    success += w[n] * reached;
    multi += w[n] * reached * (ps - single) / ps;
  }
  return success > 0.0 ? multi / success : 0.0;
}

ProtocolEstimate simulate_preparation(const PrepModel& model, std::uint64_t trials,
                                      std::uint64_t master_seed, unsigned workers) {
  model.validate();
  constexpr std::size_t kChunks = 256;
  const auto bounds = chunk_bounds(trials, kChunks);
  std::vector<std::uint64_t> succ(kChunks, 0), multi(kChunks, 0);
  parallel_for(kChunks, workers, [&](std::size_t c) {
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
      auto rng = make_stream(master_seed, i, StreamDomain::preparation);
      std::int64_t n;
      do {
        n = rng.poisson(model.n_bar);
      } while (n > model.n_cap);
      for (int pulse = 0; pulse < model.max_pulses; ++pulse) {
        const std::int64_t k = rng.binomial(n, model.p_transfer);
        if (k > 0) {
          ++succ[c];
          if (k > 1) ++multi[c];
          break;
        }
      }
    }
  });
  ProtocolEstimate e;
  e.trials = trials;
  for (std::size_t c = 0; c < kChunks; ++c) {
    e.successes += succ[c];
    e.multi_atom += multi[c];
  }
  if (e.successes > 0) {
    const double s = static_cast<double>(e.successes);
    e.probability = static_cast<double>(e.multi_atom) / s;
    e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) / s);
  }
  return e;
}

std::vector<double> detection_histogram(const PrepModel& model, double weight_success, int max_count) {
  model.validate();
  if (!(weight_success >= 0.0 && weight_success <= 1.0)) {
    throw std::domain_error("detection_histogram: weight must lie in [0, 1]");
  }
  if (max_count < 0) throw std::domain_error("detection_histogram: negative max_count");
  const auto low = poisson_pmf_table(model.lambda_low, max_count);
  const auto high = poisson_pmf_table(model.lambda_high, max_count);
  std::vector<double> h(static_cast<std::size_t>(max_count) + 1);
  for (std::size_t c = 0; c < h.size(); ++c) {
    h[c] = weight_success * low[c] + (1.0 - weight_success) * high[c];
  }
  return h;
}

double false_positive_prob(double lambda_high, int threshold) {
  if (threshold < 0) throw std::domain_error("false_positive_prob: negative threshold");
  return poisson_cdf(threshold, lambda_high);
}

double jump_during_window(double t, double tau) {
  if (!(t >= 0.0) || !(tau > 0.0)) throw std::domain_error("jump_during_window: need t >= 0, tau > 0");
  return -std::expm1(-t / tau);
}

double window_for_jump_probability(double probability, double tau) {
  if (!(probability >= 0.0 && probability < 1.0) || !(tau > 0.0)) {
    throw std::domain_error("window_for_jump_probability: need 0 <= p < 1, tau > 0");
  }
  return -tau * std::log1p(-probability);
}

PrepStateErrors prep_state_errors(const ReadoutModel& model, double window) {
  return {jump_during_window(window, model.tau_F1), jump_during_window(window, model.tau_F2)};
}

double dispersive_transmission(int n_atoms, double shift_per_atom, double kappa) {
  if (n_atoms < 0) throw std::domain_error("dispersive_transmission: negative atom number");
  if (!(kappa > 0.0)) throw std::domain_error("dispersive_transmission: kappa must be > 0");
  const double x = n_atoms * shift_per_atom / kappa;
  return 1.0 / (1.0 + x * x);
}

std::string value_probability_csv(const std::vector<double>& pmf) {
  std::string out = "value,probability\n";
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    out += std::to_string(i) + "," + format_number(pmf[i]) + "\n";
  }
  return out;
}

}  // namespace cavread
