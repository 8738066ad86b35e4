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

#include "cavread/commands.hpp"

#include <cmath>
#include <stdexcept>

#include "cavread/io.hpp"
#include "cavread/rng.hpp"

namespace cavread {
namespace {

namespace fs = std::filesystem;

// Result sections followed by the parameters that determine them. The
// output directory and worker count are left out so that outputs depend
// only on the physics and the seed.
std::string describe(const RunConfig& config, const Document& results) {
  Document doc = results;
  for (auto s : config.to_document().sections) {
    if (s.name.empty()) continue;
    std::erase_if(s.entries, [](const DocumentEntry& e) { return e.key == "out_dir" || e.key == "worker_count"; });
    doc.sections.push_back(std::move(s));
  }
  return doc.render();
}

fs::path emit(const RunConfig& config, const std::string& name, const std::string& content,
              CommandResult& result) {
  const fs::path path = fs::path(config.out_dir) / name;
  write_file_atomic(path, content);
  result.files.push_back(path);
  return path;
}

std::size_t mlm_bins(const RunConfig& config, const ReadoutModel& model) {
  if (config.errors.mlm_bins > 0) return static_cast<std::size_t>(config.errors.mlm_bins);
  return bin_count(config.errors.mlm_detection_time, model.bin_width);
}

}  // namespace

CommandResult cmd_spectrum(const RunConfig& config) {
  const LevelScheme scheme = config.level_scheme();
  SpectrumOptions options;
  options.ground_reset_rate = config.spectrum.ground_reset_rate;
  options.workers = config.worker_count;
  const auto points = spectrum(scheme, config.effective_cavity(), config.ground_population(),
                               config.spectrum.detunings(), options);

  CommandResult result;
  emit(config, "spectrum.csv", spectrum_csv(points), result);

  std::size_t peak = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].transmission_rel > points[peak].transmission_rel) peak = i;
  }
  Document meta;
  auto& s = meta.add_section("spectrum.result");
  s.set("points", std::to_string(points.size()));
  s.set("hilbert_dimension",
        std::to_string(HilbertSpace(scheme.size(), config.cavity.modes, config.cavity.n_max).dimension()));
  s.set("peak_delta_lc_mhz", format_number(rad_to_mhz(points[peak].delta_lc)));
  s.set("peak_transmission_rel", format_number(points[peak].transmission_rel));
  emit(config, "spectrum.meta", describe(config, meta), result);
  result.summary = "spectrum: " + std::to_string(points.size()) + " points, highest transmission " +
                   format_number(points[peak].transmission_rel) + " at " +
                   format_number(rad_to_mhz(points[peak].delta_lc)) + " MHz";
  return result;
}

CommandResult cmd_trace(const RunConfig& config) {
  const ReadoutModel model = config.effective_readout();
  const Trajectory trajectory =
      simulate_trajectory(model, config.trace.initial_state, config.trace.duration, config.master_seed);
  const CountTrace trace = sample_counts(trajectory, model, config.master_seed);

  CommandResult result;
  emit(config, "trace.csv", trace_csv(trace), result);

  Document meta;
  auto& s = meta.add_section("trace.result");
  s.set("rng", std::string(RandomStream::kAlgorithm));
  s.set("master_seed", std::to_string(config.master_seed));
  s.set("initial_state", to_string(trajectory.initial_state));
  s.set("bins", std::to_string(trace.size()));
  s.set("jumps", std::to_string(trajectory.jump_times.size()));
  std::string times;
  for (double t : trajectory.jump_times) times += (times.empty() ? "" : " ") + format_number(t);
  s.set("jump_times_s", times.empty() ? "none" : times);
  const BinCounts total = trace.total();
  s.set("total_c_R", std::to_string(total.reflection));
  s.set("total_c_T", std::to_string(total.transmission));
  emit(config, "trace.meta", describe(config, meta), result);
  result.summary = "trace: " + std::to_string(trace.size()) + " bins, " +
                   std::to_string(trajectory.jump_times.size()) + " jump(s)";
  return result;
}

CommandResult cmd_pmf(const RunConfig& config) {
  const ReadoutModel model = config.effective_readout();
  const double T = config.pmf.detection_time;
  PmfOptions options = config.pmf_options();
  options.caps = default_caps(model, T);
  const JointPmf p1 = count_pmf(model, HyperfineState::F1, T, options);
  const JointPmf p2 = count_pmf(model, HyperfineState::F2, T, options);
  const DecisionMap map = decision_map(p1, p2);
  const ErrorReport report = tm_errors(p1, p2, map);

  CommandResult result;
  emit(config, "pmf.csv", pmf_csv(p1, p2, map), result);
  Document meta;
  auto& s = meta.add_section("pmf.result");
  s.set("cap_R", std::to_string(p1.cap_R));
  s.set("cap_T", std::to_string(p1.cap_T));
  s.set("tail_mass_F1", format_number(p1.tail_mass));
  s.set("tail_mass_F2", format_number(p2.tail_mass));
  s.set("truncated_jump_mass_F1", format_number(p1.truncated_jump_mass));
  s.set("truncated_jump_mass_F2", format_number(p2.truncated_jump_mass));
  s.set("eps_F1", format_number(report.eps_F1));
  s.set("eps_F2", format_number(report.eps_F2));
  emit(config, "pmf.meta", describe(config, meta), result);
  result.summary = "pmf: grid " + std::to_string(p1.cap_R + 1) + " x " + std::to_string(p1.cap_T + 1) +
                   ", TM eps = " + format_number(report.eps);
  return result;
}

CommandResult cmd_errors(const RunConfig& config) {
  const ReadoutModel model = config.effective_readout();
  const ErrorReport tm = tm_errors(model, config.errors.tm_detection_time, config.pmf_options());
  const std::size_t bins = mlm_bins(config, model);
  const ErrorReport mlm =
      mlm_errors(model, config.errors.mlm_detection_time, bins, config.monte_carlo(config.errors.mc_trials));

  std::string text = tm.to_text() + "\n" + mlm.to_text();
  if (config.errors.tm_mc_trials > 0) {
    PmfOptions options = config.pmf_options();
    options.caps = default_caps(model, config.errors.tm_detection_time);
    const JointPmf p1 = count_pmf(model, HyperfineState::F1, config.errors.tm_detection_time, options);
    const JointPmf p2 = count_pmf(model, HyperfineState::F2, config.errors.tm_detection_time, options);
    const ErrorReport check = tm_errors_monte_carlo(model, config.errors.tm_detection_time,
                                                    decision_map(p1, p2),
                                                    config.monte_carlo(config.errors.tm_mc_trials));
    text += "\n# Monte-Carlo check of the threshold decision map\n" + check.to_text();
  }
  if (!config.errors.stopping_rule_bins.empty()) {
    std::vector<std::size_t> candidates(config.errors.stopping_rule_bins.begin(),
                                        config.errors.stopping_rule_bins.end());
    const BinCountScan scan =
        mlm_stopping_rule(model, model.bin_width, candidates, config.monte_carlo(config.errors.mc_trials));
    Document d;
    auto& s = d.add_section("stopping_rule");
    s.set("chosen_bins", std::to_string(scan.chosen_bins));
    std::string eps;
    for (const auto& r : scan.curve) eps += (eps.empty() ? "" : " ") + std::to_string(r.n_bins) + ":" + format_number(r.eps);
    s.set("eps_by_bins", eps);
    text += "\n" + d.render();
  }
  Document params;
  text += "\n# parameters\n" + describe(config, params);

  CommandResult result;
  emit(config, "errors.txt", text, result);
  result.summary = "TM  (T = " + format_number(tm.detection_time * 1e6) + " us): eps_F1 = " +
                   format_number(tm.eps_F1) + ", eps_F2 = " + format_number(tm.eps_F2) + ", F = " +
                   format_number(tm.fidelity) + "\nMLM (T = " + format_number(mlm.detection_time * 1e6) +
                   " us, " + std::to_string(bins) + " bins): eps_F1 = " + format_number(mlm.eps_F1) +
                   ", eps_F2 = " + format_number(mlm.eps_F2) + ", F = " + format_number(mlm.fidelity);
  return result;
}

CommandResult cmd_optimize(const RunConfig& config) {
  const ReadoutModel model = config.effective_readout();
  const auto grid = config.optimize.grid();
  const DetectionTimeScan scan = optimize_detection_time(model, grid, config.pmf_options());

  std::string csv = "detection_time_s,eps_F1,eps_F2,eps\n";
  for (const auto& r : scan.curve) {
    csv += format_number(r.detection_time) + "," + format_number(r.eps_F1) + "," + format_number(r.eps_F2) +
           "," + format_number(r.eps) + "\n";
  }
  const bool interior = scan.t_opt > grid.front() && scan.t_opt < grid.back();

  CommandResult result;
  emit(config, "optimize.csv", csv, result);
  Document meta;
  auto& s = meta.add_section("optimize.result");
  s.set("t_opt_s", format_number(scan.t_opt));
  s.set("eps_F1", format_number(scan.best.eps_F1));
  s.set("eps_F2", format_number(scan.best.eps_F2));
  s.set("eps", format_number(scan.best.eps));
  s.set("interior_minimum", interior ? "true" : "false");
  emit(config, "optimize.txt", describe(config, meta), result);
  result.summary = "optimum detection time " + format_number(scan.t_opt * 1e6) + " us, eps = " +
                   format_number(scan.best.eps) + (interior ? "" : " (at grid edge)");
  return result;
}

CommandResult cmd_prepare(const RunConfig& config) {
  const PrepModel& model = config.prep.model;
  const PulseDistribution pulses = pulses_pmf(model);
  const double weight = config.prep.success_weight.value_or(pulses.pmf.size() > 1 ? pulses.pmf[1] : 0.0);
  const auto histogram = detection_histogram(model, weight, config.prep.histogram_max_count);
  const double multi = multi_atom_prob(model);
  const double false_positive = false_positive_prob(model.lambda_high, model.count_threshold);
  const PrepStateErrors jump_errors = prep_state_errors(config.readout, config.prep.window);
  const double shift = rb87_f1_dispersive_shift(config.cavity.g0, 1, true);

  CommandResult result;
  emit(config, "pulses.csv", value_probability_csv(pulses.pmf), result);
  emit(config, "detection_histogram.csv", value_probability_csv(histogram), result);

  Document meta;
  auto& s = meta.add_section("prepare.result");
  s.set("discard_prob", format_number(pulses.discard));
  s.set("mean_pulses", format_number(pulses.mean_pulses));
  s.set("histogram_success_weight", format_number(weight));
  s.set("multi_atom_prob", format_number(multi));
  s.set("false_positive_prob", format_number(false_positive));
  s.set("jump_error_F1", format_number(jump_errors.F1));
  s.set("jump_error_F2", format_number(jump_errors.F2));
  s.set("f1_dispersive_shift_mhz", format_number(rad_to_mhz(shift)));
  std::string transmissions;
  for (int n = 0; n <= model.n_cap; ++n) {
    transmissions += (n ? " " : "") + format_number(dispersive_transmission(n, shift, config.cavity.kappa));
  }
  s.set("dispersive_transmission_by_atoms", transmissions);
  if (config.prep.mc_trials > 0) {
    const ProtocolEstimate mc =
        simulate_preparation(model, config.prep.mc_trials, config.master_seed, config.worker_count);
    s.set("mc_trials", std::to_string(mc.trials));
    s.set("mc_successes", std::to_string(mc.successes));
    s.set("mc_multi_atom_prob", format_number(mc.probability));
    s.set("mc_standard_error", format_number(mc.standard_error));
    s.set("rng", std::string(RandomStream::kAlgorithm));
  }
  emit(config, "prepare.txt", describe(config, meta), result);
  result.summary = "multi-atom probability " + format_number(multi) + ", false positive " +
                   format_number(false_positive) + ", mean pulses " + format_number(pulses.mean_pulses);
  return result;
}

CommandResult run_command(const std::string& name, const RunConfig& config) {
  if (name == "spectrum") return cmd_spectrum(config);
  if (name == "trace") return cmd_trace(config);
  if (name == "pmf") return cmd_pmf(config);
  if (name == "errors") return cmd_errors(config);
  if (name == "optimize") return cmd_optimize(config);
  if (name == "prepare") return cmd_prepare(config);
  throw std::invalid_argument("unknown subcommand '" + name + "'");
}

}  // namespace cavread
