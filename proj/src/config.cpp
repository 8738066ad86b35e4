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

#include "cavread/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "cavread/io.hpp"

namespace cavread {
namespace {

constexpr double kMhz = kTwoPi * 1e6;  // config MHz -> rad/s

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const DocumentEntry&)> read;
  std::function<std::string(const RunConfig&)> write;
};

template <typename Ref>
Field real(std::string section, std::string key, Ref ref, double scale = 1.0) {
  return {std::move(section), std::move(key),
          [ref, scale](RunConfig& c, const DocumentEntry& e) { ref(c) = parse_double(e) * scale; },
          [ref, scale](const RunConfig& c) {
            return format_number(ref(const_cast<RunConfig&>(c)) / scale);
          }};
}

template <typename Ref>
Field integer(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key),
          [ref](RunConfig& c, const DocumentEntry& e) {
            const long long v = parse_integer(e);
            using T = std::remove_reference_t<decltype(ref(c))>;
            if (v < static_cast<long long>(std::numeric_limits<T>::min()) ||
                static_cast<unsigned long long>(v) > static_cast<unsigned long long>(std::numeric_limits<T>::max())) {
              throw ConfigError("value out of range for [" + e.key + "]", e.line);
            }
            ref(c) = static_cast<T>(v);
          },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

std::uint64_t parse_u64(const DocumentEntry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  if (!e.value.empty() && e.value[0] == '-') throw ConfigError("expected a non-negative integer for " + e.key, e.line);
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ConfigError("expected a non-negative integer for " + e.key, e.line);
  }
  return v;
}

template <typename Ref>
Field count(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key),
          [ref](RunConfig& c, const DocumentEntry& e) { ref(c) = parse_u64(e); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

std::vector<double> parse_list(const DocumentEntry& e) {
  std::istringstream in(e.value);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    DocumentEntry item{e.key, token, e.line};
    out.push_back(parse_double(item));
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + format_number(xs[i]);
  return s;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(count("run", "master_seed", [](RunConfig& c) -> auto& { return c.master_seed; }));
    f.push_back(integer("run", "worker_count", [](RunConfig& c) -> auto& { return c.worker_count; }));
    f.push_back({"run", "out_dir", [](RunConfig& c, const DocumentEntry& e) { c.out_dir = e.value; },
                 [](const RunConfig& c) { return c.out_dir; }});

    f.push_back({"atom", "scheme",
                 [](RunConfig& c, const DocumentEntry& e) {
                   if (e.value == "none") c.atom.kind = AtomKind::none;
                   else if (e.value == "two_level") c.atom.kind = AtomKind::two_level;
                   else if (e.value == "rb87_d2") c.atom.kind = AtomKind::rb87_d2;
                   else throw ConfigError("atom.scheme must be none, two_level or rb87_d2", e.line);
                 },
                 [](const RunConfig& c) -> std::string {
                   switch (c.atom.kind) {
                     case AtomKind::none: return "none";
                     case AtomKind::two_level: return "two_level";
                     default: return "rb87_d2";
                   }
                 }});
    f.push_back(real("atom", "field_gauss", [](RunConfig& c) -> auto& { return c.atom.field_gauss; }));
    f.push_back(real("atom", "light_shift_mhz", [](RunConfig& c) -> auto& { return c.atom.light_shift; }, kMhz));
    f.push_back(real("atom", "gamma_mhz", [](RunConfig& c) -> auto& { return c.atom.gamma; }, kMhz));
    f.push_back({"atom", "ground_population",
                 [](RunConfig& c, const DocumentEntry& e) {
                   if (e.value == "uniform") c.atom.ground_population.clear();
                   else c.atom.ground_population = parse_list(e);
                 },
                 [](const RunConfig& c) {
                   return c.atom.ground_population.empty() ? std::string("uniform") : join(c.atom.ground_population);
                 }});

    f.push_back(real("cavity", "kappa_mhz", [](RunConfig& c) -> auto& { return c.cavity.kappa; }, kMhz));
    f.push_back(real("cavity", "g0_mhz", [](RunConfig& c) -> auto& { return c.cavity.g0; }, kMhz));
    f.push_back(real("cavity", "birefringent_splitting_mhz",
                     [](RunConfig& c) -> auto& { return c.cavity.birefringent_splitting; }, kMhz));
    f.push_back(real("cavity", "delta_ca_mhz", [](RunConfig& c) -> auto& { return c.cavity.delta_ca; }, kMhz));
    f.push_back(integer("cavity", "modes", [](RunConfig& c) -> auto& { return c.cavity.modes; }));
    f.push_back(integer("cavity", "driven_mode", [](RunConfig& c) -> auto& { return c.cavity.driven_mode; }));
    f.push_back(real("cavity", "drive_over_kappa", [](RunConfig& c) -> auto& { return c.drive_over_kappa; }));
    f.push_back(integer("cavity", "n_max", [](RunConfig& c) -> auto& { return c.cavity.n_max; }));
    f.push_back(real("cavity", "loss_fraction", [](RunConfig& c) -> auto& { return c.cavity.loss_fraction; }));

    f.push_back(real("spectrum", "detuning_start_mhz", [](RunConfig& c) -> auto& { return c.spectrum.start; }, kMhz));
    f.push_back(real("spectrum", "detuning_stop_mhz", [](RunConfig& c) -> auto& { return c.spectrum.stop; }, kMhz));
    f.push_back(integer("spectrum", "points", [](RunConfig& c) -> auto& { return c.spectrum.points; }));
    f.push_back(real("spectrum", "ground_reset_rate_mhz",
                     [](RunConfig& c) -> auto& { return c.spectrum.ground_reset_rate; }, kMhz));

    f.push_back(real("readout", "r_t_f2_per_s", [](RunConfig& c) -> auto& { return c.readout.r_T_F2; }));
    f.push_back(real("readout", "r_r_f2_per_s", [](RunConfig& c) -> auto& { return c.readout.r_R_F2; }));
    f.push_back(real("readout", "r_t_f1_per_s", [](RunConfig& c) -> auto& { return c.readout.r_T_F1; }));
    f.push_back(real("readout", "r_r_f1_per_s", [](RunConfig& c) -> auto& { return c.readout.r_R_F1; }));
    f.push_back(real("readout", "tau_f2_ms", [](RunConfig& c) -> auto& { return c.readout.tau_F2; }, 1e-3));
    f.push_back(real("readout", "tau_f1_ms", [](RunConfig& c) -> auto& { return c.readout.tau_F1; }, 1e-3));
    f.push_back(real("readout", "dead_time_ns", [](RunConfig& c) -> auto& { return c.readout.dead_time; }, 1e-9));
    f.push_back(real("readout", "bin_width_us", [](RunConfig& c) -> auto& { return c.readout.bin_width; }, 1e-6));
    f.push_back(real("readout", "power_scale", [](RunConfig& c) -> auto& { return c.power_scale; }));

    f.push_back({"trace", "initial_state",
                 [](RunConfig& c, const DocumentEntry& e) {
                   if (e.value == "F1") c.trace.initial_state = HyperfineState::F1;
                   else if (e.value == "F2") c.trace.initial_state = HyperfineState::F2;
                   else throw ConfigError("trace.initial_state must be F1 or F2", e.line);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.trace.initial_state)); }});
    f.push_back(real("trace", "duration_us", [](RunConfig& c) -> auto& { return c.trace.duration; }, 1e-6));

    f.push_back(real("pmf", "detection_time_us", [](RunConfig& c) -> auto& { return c.pmf.detection_time; }, 1e-6));
    f.push_back(integer("pmf", "max_jumps", [](RunConfig& c) -> auto& { return c.pmf.max_jumps; }));
    f.push_back(integer("pmf", "quadrature_nodes", [](RunConfig& c) -> auto& { return c.pmf.quadrature_nodes; }));

    f.push_back(real("errors", "tm_detection_time_us",
                     [](RunConfig& c) -> auto& { return c.errors.tm_detection_time; }, 1e-6));
    f.push_back(real("errors", "mlm_detection_time_us",
                     [](RunConfig& c) -> auto& { return c.errors.mlm_detection_time; }, 1e-6));
    f.push_back(integer("errors", "mlm_bins", [](RunConfig& c) -> auto& { return c.errors.mlm_bins; }));
    f.push_back(count("errors", "mc_trials", [](RunConfig& c) -> auto& { return c.errors.mc_trials; }));
    f.push_back(count("errors", "tm_mc_trials", [](RunConfig& c) -> auto& { return c.errors.tm_mc_trials; }));
    f.push_back({"errors", "stopping_rule_bins",
                 [](RunConfig& c, const DocumentEntry& e) {
                   c.errors.stopping_rule_bins.clear();
                   for (double v : parse_list(e)) {
                     if (v < 1 || v != std::floor(v)) throw ConfigError("stopping_rule_bins must be positive integers", e.line);
                     c.errors.stopping_rule_bins.push_back(static_cast<int>(v));
                   }
                 },
                 [](const RunConfig& c) {
                   std::vector<double> v(c.errors.stopping_rule_bins.begin(), c.errors.stopping_rule_bins.end());
                   return join(v);
                 }});

    f.push_back(real("optimize", "t_start_us", [](RunConfig& c) -> auto& { return c.optimize.start; }, 1e-6));
    f.push_back(real("optimize", "t_stop_us", [](RunConfig& c) -> auto& { return c.optimize.stop; }, 1e-6));
    f.push_back(real("optimize", "t_step_us", [](RunConfig& c) -> auto& { return c.optimize.step; }, 1e-6));

    f.push_back(real("prep", "n_bar", [](RunConfig& c) -> auto& { return c.prep.model.n_bar; }));
    f.push_back(real("prep", "p_transfer", [](RunConfig& c) -> auto& { return c.prep.model.p_transfer; }));
    f.push_back(integer("prep", "max_pulses", [](RunConfig& c) -> auto& { return c.prep.model.max_pulses; }));
    f.push_back(real("prep", "lambda_low", [](RunConfig& c) -> auto& { return c.prep.model.lambda_low; }));
    f.push_back(real("prep", "lambda_high", [](RunConfig& c) -> auto& { return c.prep.model.lambda_high; }));
    f.push_back(integer("prep", "count_threshold", [](RunConfig& c) -> auto& { return c.prep.model.count_threshold; }));
    f.push_back(integer("prep", "n_cap", [](RunConfig& c) -> auto& { return c.prep.model.n_cap; }));
    f.push_back({"prep", "success_weight",
                 [](RunConfig& c, const DocumentEntry& e) {
                   if (e.value == "first_pulse") c.prep.success_weight.reset();
                   else c.prep.success_weight = parse_double(e);
                 },
                 [](const RunConfig& c) {
                   return c.prep.success_weight ? format_number(*c.prep.success_weight) : std::string("first_pulse");
                 }});
    f.push_back(integer("prep", "histogram_max_count", [](RunConfig& c) -> auto& { return c.prep.histogram_max_count; }));
    f.push_back(count("prep", "mc_trials", [](RunConfig& c) -> auto& { return c.prep.mc_trials; }));
    f.push_back(real("prep", "window_us", [](RunConfig& c) -> auto& { return c.prep.window; }, 1e-6));
    return f;
  }();
  return table;
}

template <typename Fn>
void wrap_invalid(const std::string& context, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(context + ": " + e.what());
  }
}

}  // namespace

std::vector<double> SpectrumSettings::detunings() const {
  std::vector<double> d(static_cast<std::size_t>(std::max(points, 0)));
  for (int i = 0; i < points; ++i) {
    d[i] = points == 1 ? start : start + (stop - start) * i / (points - 1);
  }
  return d;
}

std::vector<double> OptimizeSettings::grid() const {
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(start + step * static_cast<double>(i));
  return g;
}

RunConfig RunConfig::parse(const std::string& text) {
  const Document doc = Document::parse(text);
  RunConfig cfg;
  std::set<std::string> known_sections;
  for (const auto& f : fields()) known_sections.insert(f.section);
  std::set<std::string> seen_sections;
  for (const auto& section : doc.sections) {
    if (section.name.empty()) {
      if (!section.entries.empty()) {
        throw ConfigError("key '" + section.entries.front().key + "' appears before any [section]",
                          section.entries.front().line);
      }
      continue;
    }
    if (!known_sections.count(section.name)) {
      throw ConfigError("unknown section [" + section.name + "]", section.line);
    }
    if (!seen_sections.insert(section.name).second) {
      throw ConfigError("section [" + section.name + "] appears twice", section.line);
    }
    for (const auto& entry : section.entries) {
      const Field* match = nullptr;
      for (const auto& f : fields()) {
        if (f.section == section.name && f.key == entry.key) match = &f;
      }
      if (!match) throw ConfigError("unknown key '" + entry.key + "' in [" + section.name + "]", entry.line);
      match->read(cfg, entry);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse(text);
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.what(), e.line());
    throw ConfigError(path + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (worker_count < 1) throw ConfigError("run.worker_count must be >= 1");
  if (out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
  wrap_invalid("cavity", [&] { effective_cavity().validate(); });
  wrap_invalid("readout", [&] {
    readout.validate();
    effective_readout().validate();
  });
  if (!(power_scale > 0.0) || !std::isfinite(power_scale)) throw ConfigError("readout.power_scale must be > 0");
  wrap_invalid("prep", [&] { prep.model.validate(); });
  wrap_invalid("atom", [&] {
    if (!(atom.field_gauss >= 0.0)) throw std::invalid_argument("field_gauss must be >= 0");
    if (!(atom.gamma > 0.0)) throw std::invalid_argument("gamma_mhz must be > 0");
    const LevelScheme scheme = level_scheme();
    scheme.validate();
    const auto pop = ground_population();
    const auto ground = scheme.ground_levels();
    if (pop.size() != ground.size()) {
      throw std::invalid_argument("ground_population needs " + std::to_string(ground.size()) + " entries");
    }
    double sum = 0.0;
    for (double p : pop) {
      if (!(p >= 0.0)) throw std::invalid_argument("ground_population entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ground_population must sum to 1");
  });
  if (spectrum.points < 1) throw ConfigError("spectrum.points must be >= 1");
  if (!std::isfinite(spectrum.start) || !std::isfinite(spectrum.stop)) throw ConfigError("spectrum detunings must be finite");
  if (!(spectrum.ground_reset_rate >= 0.0)) throw ConfigError("spectrum.ground_reset_rate_mhz must be >= 0");
  if (!(trace.duration > 0.0)) throw ConfigError("trace.duration_us must be > 0");
  wrap_invalid("trace", [&] { bin_count(trace.duration, readout.bin_width); });
  if (!(pmf.detection_time > 0.0)) throw ConfigError("pmf.detection_time_us must be > 0");
  if (pmf.max_jumps < 0 || pmf.max_jumps > 4) throw ConfigError("pmf.max_jumps must lie in [0, 4]");
  if (pmf.quadrature_nodes < 1) throw ConfigError("pmf.quadrature_nodes must be >= 1");
  if (!(errors.tm_detection_time > 0.0) || !(errors.mlm_detection_time > 0.0)) {
    throw ConfigError("errors detection times must be > 0");
  }
  if (errors.mlm_bins < 0) throw ConfigError("errors.mlm_bins must be >= 0");
  if (errors.mlm_bins == 0) wrap_invalid("errors", [&] { bin_count(errors.mlm_detection_time, readout.bin_width); });
  if (errors.mc_trials < 1) throw ConfigError("errors.mc_trials must be >= 1");
  if (!(optimize.step > 0.0) || !(optimize.start > 0.0) || !(optimize.stop >= optimize.start)) {
    throw ConfigError("optimize grid needs 0 < t_start_us <= t_stop_us and t_step_us > 0");
  }
  if (prep.success_weight && !(*prep.success_weight >= 0.0 && *prep.success_weight <= 1.0)) {
    throw ConfigError("prep.success_weight must lie in [0, 1]");
  }
  if (prep.histogram_max_count < 0) throw ConfigError("prep.histogram_max_count must be >= 0");
  if (!(prep.window >= 0.0)) throw ConfigError("prep.window_us must be >= 0");
}

Document RunConfig::to_document() const {
  Document doc;
  for (const auto& f : fields()) {
    DocumentSection* section = nullptr;
    for (auto& s : doc.sections) {
      if (s.name == f.section) section = &s;
    }
    if (!section) section = &doc.add_section(f.section);
    section->set(f.key, f.write(*this));
  }
  return doc;
}

LevelScheme RunConfig::level_scheme() const {
  if (atom.kind == AtomKind::rb87_d2) return build_rb87_d2(atom.field_gauss, atom.light_shift, atom.gamma);
  return build_two_level(atom.gamma);
}

CavityConfig RunConfig::effective_cavity() const {
  CavityConfig c = cavity;
  c.drive_amplitude = drive_over_kappa * cavity.kappa;
  if (atom.kind == AtomKind::none) c.g0 = 0.0;
  return c;
}

std::vector<double> RunConfig::ground_population() const {
  if (!atom.ground_population.empty()) return atom.ground_population;
  return uniform_ground_population(level_scheme());
}

ReadoutModel RunConfig::effective_readout() const {
  return apply_dead_time(scale_probe_power(readout, power_scale));
}

PmfOptions RunConfig::pmf_options() const {
  PmfOptions o;
  o.max_jumps = pmf.max_jumps;
  o.quadrature_nodes = pmf.quadrature_nodes;
  return o;
}

MonteCarloOptions RunConfig::monte_carlo(std::uint64_t trials) const {
  MonteCarloOptions o;
  o.n_trials = trials;
  o.master_seed = master_seed;
  o.workers = worker_count;
  return o;
}

}  // namespace cavread
