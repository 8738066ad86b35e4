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

#include "cavread/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavread/document.hpp"

namespace cavread {

const char* to_string(HyperfineState s) { return s == HyperfineState::F2 ? "F2" : "F1"; }

void ReadoutModel::validate() const {
  for (double r : {r_T_F2, r_R_F2, r_T_F1, r_R_F1}) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("readout model: rates must be finite and >= 0");
  }
  if (!(tau_F2 > 0.0) || !(tau_F1 > 0.0)) throw std::invalid_argument("readout model: lifetimes must be > 0");
  if (!(dead_time >= 0.0)) throw std::invalid_argument("readout model: dead_time must be >= 0");
  if (!(bin_width > 0.0)) throw std::invalid_argument("readout model: bin_width must be > 0");
}

HyperfineState Trajectory::state_at(double t) const {
  const auto jumps = std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
  return jumps % 2 == 0 ? initial_state : other(initial_state);
}

double Trajectory::occupancy(HyperfineState s, double t0, double t1) const {
  double total = 0.0;
  double start = 0.0;
  HyperfineState state = initial_state;
  for (std::size_t i = 0; i <= jump_times.size(); ++i) {
    const double end = i < jump_times.size() ? jump_times[i] : total_time;
    if (state == s) total += std::max(0.0, std::min(end, t1) - std::max(start, t0));
    if (end >= t1) break;
    start = end;
    state = other(state);
  }
  return total;
}

void Trajectory::validate() const {
  if (!(total_time > 0.0)) throw std::invalid_argument("trajectory: total_time must be > 0");
  double previous = 0.0;
  for (std::size_t i = 0; i < jump_times.size(); ++i) {
    const double t = jump_times[i];
    if (t < 0.0 || t > total_time || (i > 0 && !(t > previous))) {
      throw std::invalid_argument("trajectory: jump times must be strictly increasing in [0, T]");
    }
    previous = t;
  }
}

BinCounts CountTrace::total() const {
  BinCounts sum;
  for (const auto& b : bins) {
    sum.reflection += b.reflection;
    sum.transmission += b.transmission;
  }
  return sum;
}

Trajectory simulate_trajectory(const ReadoutModel& model, HyperfineState initial, double total_time,
                               RandomStream& rng) {
  if (!(total_time > 0.0)) throw std::domain_error("simulate_trajectory: T must be > 0");
  Trajectory out;
  out.initial_state = initial;
  out.total_time = total_time;
  HyperfineState state = initial;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(model.lifetime(state));
    if (!(t < total_time)) break;
    out.jump_times.push_back(t);
    state = other(state);
  }
  return out;
}

Trajectory simulate_trajectory(const ReadoutModel& model, HyperfineState initial, double total_time,
                               std::uint64_t seed) {
  auto rng = make_stream(seed, 0, StreamDomain::trajectory);
  return simulate_trajectory(model, initial, total_time, rng);
}

std::size_t bin_count(double total_time, double bin_width) {
  if (!(bin_width > 0.0) || !(total_time > 0.0)) throw std::domain_error("bin_count: non-positive time");
  const double ratio = total_time / bin_width;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw std::domain_error("total time is not an integer number of bins");
  }
  return static_cast<std::size_t>(n);
}

CountTrace sample_counts(const Trajectory& trajectory, const ReadoutModel& model, RandomStream& rng) {
  const std::size_t n = bin_count(trajectory.total_time, model.bin_width);
  CountTrace trace;
  trace.bin_width = model.bin_width;
  trace.bins.resize(n);

  // Walk the jump list once, accumulating per-bin F2 occupancy.
  std::size_t next_jump = 0;
  HyperfineState state = trajectory.initial_state;
  for (std::size_t i = 0; i < n; ++i) {
    const double t0 = static_cast<double>(i) * model.bin_width;
    const double t1 = static_cast<double>(i + 1) * model.bin_width;
    double in_f2 = 0.0;
    double cursor = t0;
    while (next_jump < trajectory.jump_times.size() && trajectory.jump_times[next_jump] < t1) {
      const double tj = trajectory.jump_times[next_jump++];
      if (state == HyperfineState::F2) in_f2 += tj - cursor;
      cursor = tj;
      state = other(state);
    }
    if (state == HyperfineState::F2) in_f2 += t1 - cursor;
    const double in_f1 = model.bin_width - in_f2;

    const double mean_r = model.r_R_F2 * in_f2 + model.r_R_F1 * in_f1;
    const double mean_t = model.r_T_F2 * in_f2 + model.r_T_F1 * in_f1;
    trace.bins[i].reflection = rng.poisson(mean_r);
    trace.bins[i].transmission = rng.poisson(mean_t);
  }
  return trace;
}

CountTrace sample_counts(const Trajectory& trajectory, const ReadoutModel& model, std::uint64_t seed) {
  auto rng = make_stream(seed, 0, StreamDomain::counts);
  return sample_counts(trajectory, model, rng);
}

double effective_rate(double rate, double dead_time) {
  if (!(rate >= 0.0) || !(dead_time >= 0.0)) {
    throw std::domain_error("effective_rate: rate and dead time must be >= 0");
  }
  if (std::isinf(rate)) return dead_time > 0.0 ? 1.0 / dead_time : rate;
  return rate / (1.0 + rate * dead_time);
}

ReadoutModel apply_dead_time(const ReadoutModel& model) {
  ReadoutModel out = model;
  out.r_T_F2 = effective_rate(model.r_T_F2, model.dead_time);
  out.r_R_F2 = effective_rate(model.r_R_F2, model.dead_time);
  out.r_T_F1 = effective_rate(model.r_T_F1, model.dead_time);
  out.r_R_F1 = effective_rate(model.r_R_F1, model.dead_time);
  return out;
}

ReadoutModel scale_probe_power(const ReadoutModel& model, double power_scale) {
  if (!(power_scale > 0.0)) throw std::invalid_argument("scale_probe_power: scale must be > 0");
  ReadoutModel out = model;
  out.r_T_F2 *= power_scale;
  out.r_R_F2 *= power_scale;
  out.r_T_F1 *= power_scale;
  out.r_R_F1 *= power_scale;
  out.tau_F2 /= power_scale;
  out.tau_F1 /= power_scale;
  return out;
}

std::string trace_csv(const CountTrace& trace) {
  std::string out = "bin_index,t_start_s,c_R,c_T\n";
  for (std::size_t i = 0; i < trace.bins.size(); ++i) {
    out += std::to_string(i) + "," + format_number(static_cast<double>(i) * trace.bin_width) + "," +
           std::to_string(trace.bins[i].reflection) + "," + std::to_string(trace.bins[i].transmission) +
           "\n";
  }
  return out;
}

}  // namespace cavread
