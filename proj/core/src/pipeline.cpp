// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "oamstore/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "oamstore/error.hpp"
#include "oamstore/random.hpp"
#include "oamstore/text.hpp"

namespace oamstore::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw InvalidArgument("config " + path + ": " + message);
}

/// One JSON object being read; remembers which keys were consumed so leftovers
/// can be reported as unknown.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j_->is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(at(key), "must be finite");
    }
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = v->get<Int>();
        } else {
          auto s = v->get<std::int64_t>();
          if (s < 0) fail(at(key), "must be >= 0");
          out = static_cast<Int>(s);
        }
      } else {
        auto s = v->get<std::int64_t>();
        if (s < std::numeric_limits<Int>::min() || s > std::numeric_limits<Int>::max()) fail(at(key), "out of range");
        out = static_cast<Int>(s);
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

template <class F>
void with_object(Node& parent, const std::string& key, F&& f) {
  if (const json* v = parent.find(key)) {
    Node child(*v, parent.at(key));
    f(child);
    child.finish();
  }
}

/// Spectrum entries {"l", "re", "im"}; weights are normalised on load.
void read_spectrum(Node& parent, const std::string& key, source::SchmidtSpectrum& out) {
  const json* v = parent.find(key);
  if (!v) return;
  const std::string path = parent.at(key);
  if (!v->is_array() || v->empty()) fail(path, "expected a non-empty array of {l, re, im}");
  std::map<OamLabel, Complex> c;
  double norm = 0.0;
  for (std::size_t i = 0; i < v->size(); ++i) {
    Node e((*v)[i], path + "[" + std::to_string(i) + "]");
    int l = 0;
    double re = 0.0, im = 0.0;
    if (!e.find("l")) fail(e.at("l"), "is required");
    e.integer("l", l);
    e.number("re", re);
    e.number("im", im);
    e.finish();
    if (c.count(OamLabel{l})) fail(e.at("l"), "duplicate label");
    c[OamLabel{l}] = Complex(re, im);
    norm += re * re + im * im;
  }
  if (!(norm > 0.0)) fail(path, "all amplitudes are zero");
  // Already-normalised input is kept bit for bit so configs round-trip.
  if (std::abs(norm - 1.0) > 1e-12) {
    for (auto& [label, amp] : c) amp /= std::sqrt(norm);
  }
  try {
    out = source::SchmidtSpectrum(std::move(c));
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

json spectrum_json(const source::SchmidtSpectrum& s) {
  json a = json::array();
  for (const auto& [label, c] : s.coefficients()) a.push_back({{"l", label.l}, {"re", c.real()}, {"im", c.imag()}});
  return a;
}

const char* statistics_name(source::PairStatistics s) {
  switch (s) {
    case source::PairStatistics::thermal:
      return "thermal";
    case source::PairStatistics::heralded_single:
      return "heralded_single";
    case source::PairStatistics::fixed:
      return "fixed_pairs";
  }
  return "thermal";
}

void read_arm(Node& parent, const std::string& key, ArmOptics& arm) {
  with_object(parent, key, [&](Node& n) {
    n.integer("mirror_count", arm.path.mirror_count);
    n.boolean("has_4f_inversion", arm.path.has_4f_inversion);
    n.number("crosstalk", arm.imperfection.crosstalk);
    n.number("phase_offset_rad", arm.imperfection.phase_offset_rad);
    std::string conj = arm.sector_conjugation == optics::Conjugation::conjugate ? "conjugate" : "identity";
    n.string("sector_conjugation", conj);
    if (conj == "conjugate") {
      arm.sector_conjugation = optics::Conjugation::conjugate;
    } else if (conj == "identity") {
      arm.sector_conjugation = optics::Conjugation::identity;
    } else {
      fail(n.at("sector_conjugation"), "expected 'identity' or 'conjugate'");
    }
  });
}

json arm_json(const ArmOptics& arm) {
  return {{"mirror_count", arm.path.mirror_count},
          {"has_4f_inversion", arm.path.has_4f_inversion},
          {"crosstalk", arm.imperfection.crosstalk},
          {"phase_offset_rad", arm.imperfection.phase_offset_rad},
          {"sector_conjugation", arm.sector_conjugation == optics::Conjugation::conjugate ? "conjugate" : "identity"}};
}

std::uint64_t plan_seed(std::uint64_t seed, std::uint64_t tag) { return random::splitmix64(seed ^ random::splitmix64(tag)); }

constexpr std::uint64_t kTomoIndex = 0;
constexpr std::uint64_t kTomoPreIndex = 1000;
constexpr std::uint64_t kChshIndex = 2000;
constexpr std::uint64_t kChshPreIndex = 3000;
constexpr std::uint64_t kVisibilityIndex = 4000;

}  // namespace

MeasurementPlan::MeasurementPlan() {
  using std::numbers::pi;
  visibility_theta_a_rad = {0.0, pi / 4.0};
  for (int k = 0; k < 12; ++k) visibility_theta_b_rad.push_back(k * pi / 12.0);
}

void RunConfig::validate() const {
  auto wrap = [](const std::string& section, auto&& f) {
    try {
      f();
    } catch (const InvalidArgument& e) {
      fail(section, e.what());
    }
  };
  wrap("source", [&] { source.validate(); });
  wrap("memory.fit", [&] { memory.fit.validate(); });
  wrap("memory.noise", [&] { memory.noise.validate(); });
  wrap("measurement.detector", [&] { measurement.detector.validate(); });
  if (!(memory.storage_time_ns >= 0.0)) fail("memory.storage_time_ns", "must be >= 0");
  if (!(memory.pump_delay_ns >= 0.0)) fail("memory.pump_delay_ns", "must be >= 0");
  if (optics.postselect_l < 1) fail("optics.postselect_l", "must be >= 1");
  for (auto [arm, name] : {std::pair{&optics.signal1, "optics.signal1"}, std::pair{&optics.signal2, "optics.signal2"}}) {
    if (arm->path.mirror_count < 0) fail(std::string(name) + ".mirror_count", "must be >= 0");
    if (!(arm->imperfection.crosstalk >= 0.0 && arm->imperfection.crosstalk <= 1.0)) {
      fail(std::string(name) + ".crosstalk", "must lie in [0, 1]");
    }
  }
  if (!(measurement.windows_per_setting > 0.0)) fail("measurement.windows_per_setting", "must be > 0");
  if (measurement.hist_span_ns <= 0) fail("measurement.hist_span_ns", "must be > 0");
  if (!(measurement.peak_window_ns > 0.0)) fail("measurement.peak_window_ns", "must be > 0");
  if (measurement.visibility) {
    if (measurement.visibility_theta_a_rad.empty()) fail("measurement.visibility_theta_a_rad", "is empty");
    if (measurement.visibility_theta_b_rad.size() < 4) fail("measurement.visibility_theta_b_rad", "needs >= 4 angles");
  }
}

RunConfig parse_run_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Node r(root, "");
  r.integer("seed", c.seed);
  r.string("output_dir", c.output_dir);
  with_object(r, "source", [&](Node& n) {
    auto& s = c.source;
    n.number("pair_rate_per_window", s.pair_rate);
    n.number("thermal_auto_g2", s.thermal_auto_g2);
    std::string stats = statistics_name(s.statistics);
    n.string("pair_statistics", stats);
    if (stats == "thermal") {
      s.statistics = source::PairStatistics::thermal;
    } else if (stats == "heralded_single") {
      s.statistics = source::PairStatistics::heralded_single;
    } else if (stats == "fixed_pairs") {
      s.statistics = source::PairStatistics::fixed;
    } else {
      fail(n.at("pair_statistics"), "expected thermal, heralded_single or fixed_pairs");
    }
    n.integer("fixed_pair_count", s.fixed_pair_count);
    n.number("accidental_rate_signal1_per_window", s.accidental_rate_signal1);
    n.number("accidental_rate_signal2_per_window", s.accidental_rate_signal2);
    n.number("transmission_signal1", s.transmission_signal1);
    n.number("transmission_signal2", s.transmission_signal2);
    n.integer("pulse_period_ns", s.pulse_period_ns);
    n.integer("n_windows", s.window_count);
    n.integer("pair_delay_ns", s.pair_delay_ns);
    read_spectrum(n, "spectrum", c.spectrum);
  });
  with_object(r, "memory", [&](Node& n) {
    n.boolean("enabled", c.memory.enabled);
    n.number("storage_time_ns", c.memory.storage_time_ns);
    n.number("pump_delay_ns", c.memory.pump_delay_ns);
    with_object(n, "fit", [&](Node& f) {
      f.number("g0", c.memory.fit.g0);
      f.number("A", c.memory.fit.amplitude);
      f.number("tau0_ns", c.memory.fit.tau0_ns);
      f.number("T_ns", c.memory.fit.decay_ns);
    });
    with_object(n, "noise", [&](Node& f) {
      f.number("dephasing_rate_per_ns", c.memory.noise.dephasing_rate_per_ns);
      f.number("depolarizing_floor", c.memory.noise.depolarizing_floor);
      f.number("mode_mixing_rate_per_ns", c.memory.noise.mode_mixing_rate_per_ns);
      f.number("precession_rate_rad_per_ns", c.memory.noise.precession_rate_rad_per_ns);
    });
  });
  with_object(r, "optics", [&](Node& n) {
    n.integer("postselect_l", c.optics.postselect_l);
    read_arm(n, "signal1", c.optics.signal1);
    read_arm(n, "signal2", c.optics.signal2);
  });
  with_object(r, "measurement", [&](Node& n) {
    auto& m = c.measurement;
    if (const json* plans = n.find("plans")) {
      if (!plans->is_array()) fail(n.at("plans"), "expected an array of plan names");
      m.tomo16 = m.chsh = m.visibility = m.hbt = m.correlate = false;
      for (std::size_t i = 0; i < plans->size(); ++i) {
        const auto& p = (*plans)[i];
        const std::string where = n.at("plans") + "[" + std::to_string(i) + "]";
        if (!p.is_string()) fail(where, "expected a string");
        const auto name = p.get<std::string>();
        if (name == "tomo16") {
          m.tomo16 = true;
        } else if (name == "chsh") {
          m.chsh = true;
        } else if (name == "visibility") {
          m.visibility = true;
        } else if (name == "hbt") {
          m.hbt = true;
        } else if (name == "correlate") {
          m.correlate = true;
        } else {
          fail(where, "unknown plan '" + name + "'");
        }
      }
    }
    n.boolean("include_pre_storage", m.include_pre_storage);
    n.number("windows_per_setting", m.windows_per_setting);
    with_object(n, "chsh_angles_rad", [&](Node& a) {
      a.number("a", m.chsh_angles.a);
      a.number("a_prime", m.chsh_angles.a_prime);
      a.number("b", m.chsh_angles.b);
      a.number("b_prime", m.chsh_angles.b_prime);
    });
    n.numbers("visibility_theta_a_rad", m.visibility_theta_a_rad);
    n.numbers("visibility_theta_b_rad", m.visibility_theta_b_rad);
    n.boolean("background_subtraction", m.background_subtraction);
    n.integer("hist_span_ns", m.hist_span_ns);
    n.number("peak_window_ns", m.peak_window_ns);
    with_object(n, "detector", [&](Node& d) {
      d.number("jitter_ns", m.detector.jitter_ns);
      d.number("dead_time_ns", m.detector.dead_time_ns);
      d.integer("bin_width_ns", m.detector.bin_width_ns);
    });
    read_spectrum(n, "event_spectrum", m.event_spectrum);
  });
  r.finish();
  c.validate();
  return c;
}

std::string to_json(const RunConfig& c) {
  json plans = json::array();
  if (c.measurement.tomo16) plans.push_back("tomo16");
  if (c.measurement.chsh) plans.push_back("chsh");
  if (c.measurement.visibility) plans.push_back("visibility");
  if (c.measurement.hbt) plans.push_back("hbt");
  if (c.measurement.correlate) plans.push_back("correlate");
  const auto& s = c.source;
  const auto& m = c.measurement;
  json j = {
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"source",
       {{"pair_rate_per_window", s.pair_rate},
        {"pair_statistics", statistics_name(s.statistics)},
        {"thermal_auto_g2", s.thermal_auto_g2},
        {"fixed_pair_count", s.fixed_pair_count},
        {"accidental_rate_signal1_per_window", s.accidental_rate_signal1},
        {"accidental_rate_signal2_per_window", s.accidental_rate_signal2},
        {"transmission_signal1", s.transmission_signal1},
        {"transmission_signal2", s.transmission_signal2},
        {"pulse_period_ns", s.pulse_period_ns},
        {"n_windows", s.window_count},
        {"pair_delay_ns", s.pair_delay_ns},
        {"spectrum", spectrum_json(c.spectrum)}}},
      {"memory",
       {{"enabled", c.memory.enabled},
        {"storage_time_ns", c.memory.storage_time_ns},
        {"pump_delay_ns", c.memory.pump_delay_ns},
        {"fit",
         {{"g0", c.memory.fit.g0},
          {"A", c.memory.fit.amplitude},
          {"tau0_ns", c.memory.fit.tau0_ns},
          {"T_ns", c.memory.fit.decay_ns}}},
        {"noise",
         {{"dephasing_rate_per_ns", c.memory.noise.dephasing_rate_per_ns},
          {"depolarizing_floor", c.memory.noise.depolarizing_floor},
          {"mode_mixing_rate_per_ns", c.memory.noise.mode_mixing_rate_per_ns},
          {"precession_rate_rad_per_ns", c.memory.noise.precession_rate_rad_per_ns}}}}},
      {"optics",
       {{"postselect_l", c.optics.postselect_l},
        {"signal1", arm_json(c.optics.signal1)},
        {"signal2", arm_json(c.optics.signal2)}}},
      {"measurement",
       {{"plans", plans},
        {"include_pre_storage", m.include_pre_storage},
        {"windows_per_setting", m.windows_per_setting},
        {"chsh_angles_rad",
         {{"a", m.chsh_angles.a}, {"a_prime", m.chsh_angles.a_prime}, {"b", m.chsh_angles.b}, {"b_prime", m.chsh_angles.b_prime}}},
        {"visibility_theta_a_rad", m.visibility_theta_a_rad},
        {"visibility_theta_b_rad", m.visibility_theta_b_rad},
        {"background_subtraction", m.background_subtraction},
        {"hist_span_ns", m.hist_span_ns},
        {"peak_window_ns", m.peak_window_ns},
        {"detector",
         {{"jitter_ns", m.detector.jitter_ns},
          {"dead_time_ns", m.detector.dead_time_ns},
          {"bin_width_ns", m.detector.bin_width_ns}}},
        {"event_spectrum", spectrum_json(m.event_spectrum)}}},
  };
  return j.dump(2) + "\n";
}

PreparedState prepared_state(const RunConfig& config, bool with_storage) {
  const auto& o = config.optics;
  DensityMatrix rho = source::postselect_2d(source::srs_state(config.spectrum), o.postselect_l, o.signal2.path,
                                            o.signal1.path);
  rho = optics::apply_imperfection(rho, Arm::signal2, o.signal2.imperfection);
  rho = optics::apply_imperfection(rho, Arm::signal1, o.signal1.imperfection);
  if (!with_storage) return {rho, 1.0};
  auto out = memory::apply_channel(rho, Arm::signal1, config.memory.storage_time_ns, config.memory.fit,
                                   config.memory.noise);
  return {out.rho, out.retrieval_probability};
}

double CountModel::signal(double p_ab, double p_a, double p_b) const {
  const double s2 = pair_rate * transmission_signal2 * p_a + accidental_signal2 / 2.0;
  const double s1_noise = accidental_signal1 / 2.0;
  return windows * (pair_rate * transmission_signal1 * transmission_signal2 * p_ab +
                    pair_second_moment * transmission_signal1 * transmission_signal2 * p_a * p_b +
                    s2 * s1_noise + (accidental_signal2 / 2.0) * pair_rate * transmission_signal1 * p_b);
}

double CountModel::background(double p_a) const {
  return windows * (pair_rate * transmission_signal2 * p_a + accidental_signal2 / 2.0) * (accidental_signal1 / 2.0);
}

CountModel count_model(const RunConfig& config, double retrieval_probability) {
  CountModel m;
  m.windows = config.measurement.windows_per_setting;
  m.pair_rate = config.source.pair_rate;
  m.pair_second_moment = source::pair_second_factorial_moment(config.source, config.spectrum);
  m.transmission_signal1 = config.source.transmission_signal1 * retrieval_probability;
  m.transmission_signal2 = config.source.transmission_signal2;
  m.accidental_signal1 = config.source.accidental_rate_signal1;
  m.accidental_signal2 = config.source.accidental_rate_signal2;
  return m;
}

std::pair<std::vector<double>, std::vector<double>> sample_settings(
    const DensityMatrix& rho, const std::vector<optics::MeasurementSetting>& settings, const CountModel& model,
    std::uint64_t seed, std::uint64_t first_index) {
  if (rho.basis() != Basis::two_qubit()) throw InvalidArgument("count sampling needs a two-qubit state");
  const CMatrix rho_a = partial_trace(rho.matrix(), 2, 2, 1);
  const CMatrix rho_b = partial_trace(rho.matrix(), 2, 2, 0);
  auto draw = [](double mean, random::Engine& rng) {
    return mean > 0.0 ? static_cast<double>(std::poisson_distribution<std::int64_t>(mean)(rng)) : 0.0;
  };
  std::vector<double> raw, bg;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    CVector v = tensor(s.signal2, s.signal1).amplitudes();
    const double p_ab = std::max((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0);
    const double p_a = std::max((s.signal2.amplitudes().adjoint() * rho_a * s.signal2.amplitudes())(0, 0).real(), 0.0);
    const double p_b = std::max((s.signal1.amplitudes().adjoint() * rho_b * s.signal1.amplitudes())(0, 0).real(), 0.0);
    random::Engine r1(seed, random::Stream::count_table, first_index + k);
    random::Engine r2(seed, random::Stream::background_table, first_index + k);
    raw.push_back(draw(model.signal(p_ab, p_a, p_b), r1));
    bg.push_back(draw(model.background(p_a), r2));
  }
  return {raw, bg};
}

std::vector<optics::MeasurementSetting> visibility_settings(const RunConfig& config, formats::VisibilityScan* rows) {
  std::vector<optics::MeasurementSetting> out;
  for (double ta : config.measurement.visibility_theta_a_rad) {
    for (double tb : config.measurement.visibility_theta_b_rad) {
      out.push_back(optics::sector_setting(optics::SectorAngle(ta), optics::SectorAngle(tb),
                                           config.optics.signal2.sector_conjugation,
                                           config.optics.signal1.sector_conjugation));
      if (rows) rows->rows.push_back({ta, tb, 0.0});
    }
  }
  return out;
}

SimulationProducts simulate(const RunConfig& config) {
  config.validate();
  const auto& m = config.measurement;
  SimulationProducts p(prepared_state(config, config.memory.enabled));
  if (config.memory.enabled && m.include_pre_storage) p.pre = prepared_state(config, false);
  const CountModel post_model = count_model(config, p.post.retrieval_probability);
  const CountModel pre_model = count_model(config, 1.0);
  const double integration_s = m.windows_per_setting * static_cast<double>(config.source.pulse_period_ns) * 1e-9;

  auto table = [&](const PreparedState& st, const CountModel& model, std::uint64_t index, auto& raw_out, auto& bg_out) {
    auto [raw, bg] = sample_settings(st.rho, optics::tomography_settings(), model, config.seed, index);
    raw_out = analysis::CountTable16::from_flat(raw, integration_s);
    bg_out = analysis::CountTable16::from_flat(bg, integration_s);
  };
  auto chsh = [&](const PreparedState& st, const CountModel& model, std::uint64_t index, auto& raw_out, auto& bg_out) {
    auto settings = analysis::chsh_settings(m.chsh_angles, config.optics.signal2.sector_conjugation,
                                            config.optics.signal1.sector_conjugation);
    auto [raw, bg] = sample_settings(st.rho, settings, model, config.seed, index);
    raw_out = analysis::chsh_from_flat(m.chsh_angles, raw);
    bg_out = analysis::chsh_from_flat(m.chsh_angles, bg);
  };

  if (m.tomo16) {
    table(p.post, post_model, kTomoIndex, p.tomo, p.tomo_background);
    if (p.pre) table(*p.pre, pre_model, kTomoPreIndex, p.tomo_pre, p.tomo_pre_background);
  }
  if (m.chsh) {
    chsh(p.post, post_model, kChshIndex, p.chsh, p.chsh_background);
    if (p.pre) chsh(*p.pre, pre_model, kChshPreIndex, p.chsh_pre, p.chsh_pre_background);
  }
  if (m.visibility) {
    formats::VisibilityScan scan;
    auto settings = visibility_settings(config, &scan);
    auto [raw, bg] = sample_settings(p.post.rho, settings, post_model, config.seed, kVisibilityIndex);
    p.visibility = scan.with_counts(raw);
    p.visibility_background = scan.with_counts(bg);
  }

  auto event_run = [&](const counts::ChannelMap& channels, std::uint64_t tag) {
    auto emissions = source::sample_emissions(config.source, m.event_spectrum, plan_seed(config.seed, tag));
    return counts::detect(emissions, config.source.transmission_signal1 * p.post.retrieval_probability,
                          config.source.transmission_signal2, channels, m.detector, plan_seed(config.seed, tag + 1));
  };
  if (m.correlate) p.correlate = event_run(counts::ChannelMap::correlation(), 0x100);
  if (m.hbt) p.hbt = event_run(counts::ChannelMap::hbt(), 0x200);
  return p;
}

std::vector<std::string> write_products(const RunConfig& config, const SimulationProducts& p, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& content) {
    text::write_file((std::filesystem::path(dir) / name).string(), content);
    files.push_back(name);
  };
  put("state_model.txt", to_text(p.post.rho));
  if (p.pre) put("state_model_pre.txt", to_text(p.pre->rho));
  if (p.tomo) put("tomo16_counts.csv", formats::to_csv(*p.tomo));
  if (p.tomo_background) put("tomo16_background.csv", formats::to_csv(*p.tomo_background));
  if (p.tomo_pre) put("tomo16_pre_counts.csv", formats::to_csv(*p.tomo_pre));
  if (p.tomo_pre_background) put("tomo16_pre_background.csv", formats::to_csv(*p.tomo_pre_background));
  if (p.chsh) put("chsh_counts.csv", formats::to_csv(*p.chsh));
  if (p.chsh_background) put("chsh_background.csv", formats::to_csv(*p.chsh_background));
  if (p.chsh_pre) put("chsh_pre_counts.csv", formats::to_csv(*p.chsh_pre));
  if (p.chsh_pre_background) put("chsh_pre_background.csv", formats::to_csv(*p.chsh_pre_background));
  if (p.visibility) put("visibility_counts.csv", formats::to_csv(*p.visibility));
  if (p.visibility_background) put("visibility_background.csv", formats::to_csv(*p.visibility_background));
  if (p.correlate) put("correlate_stream.txt", counts::to_text(*p.correlate));
  if (p.hbt) put("hbt_stream.txt", counts::to_text(*p.hbt));

  json manifest = {{"tool", "oamstore"},
                   {"format_version", 1},
                   {"seed", config.seed},
                   {"retrieval_probability", p.post.retrieval_probability},
                   {"files", files},
                   {"config", json::parse(to_json(config))}};
  put("manifest.json", manifest.dump(2) + "\n");
  return files;
}

analysis::TomographyResult analyze_tomography(const analysis::CountTable16& raw, const analysis::CountTable16* background,
                                              const TomographyOptions& options) {
  const bool subtract = background && options.background_subtraction;
  auto table = subtract ? analysis::subtract_background(raw, *background) : raw;
  auto result = analysis::reconstruct(table, options.method);
  if (options.resamples > 0) {
    std::vector<double> all = raw.flat();
    if (subtract) {
      auto b = background->flat();
      all.insert(all.end(), b.begin(), b.end());
    }
    auto estimator = [&](std::span<const double> d) {
      auto t = analysis::CountTable16::from_flat(d.subspan(0, 16));
      if (subtract) t = analysis::subtract_background(t, analysis::CountTable16::from_flat(d.subspan(16, 16)));
      return analysis::reconstruct(t, options.method).fidelity_to_ideal;
    };
    result.fidelity_std = analysis::montecarlo_std(all, estimator, options.resamples, options.seed);
  }
  return result;
}

counts::Estimate state_fidelity(const analysis::CountTable16& output_raw, const analysis::CountTable16* output_background,
                                const analysis::CountTable16& input_raw, const analysis::CountTable16* input_background,
                                const TomographyOptions& options) {
  const bool sub_out = output_background && options.background_subtraction;
  const bool sub_in = input_background && options.background_subtraction;
  std::vector<double> all = output_raw.flat();
  auto append = [&](const analysis::CountTable16& t) {
    auto f = t.flat();
    all.insert(all.end(), f.begin(), f.end());
  };
  if (sub_out) append(*output_background);
  append(input_raw);
  if (sub_in) append(*input_background);

  auto estimator = [&](std::span<const double> d) {
    std::size_t at = 0;
    auto next = [&] {
      auto t = analysis::CountTable16::from_flat(d.subspan(at, 16));
      at += 16;
      return t;
    };
    auto out = next();
    if (sub_out) out = analysis::subtract_background(out, next());
    auto in = next();
    if (sub_in) in = analysis::subtract_background(in, next());
    return fidelity(analysis::reconstruct(out, options.method).rho, analysis::reconstruct(in, options.method).rho);
  };
  counts::Estimate e;
  e.value = estimator(all);
  e.std_error = options.resamples > 0 ? analysis::montecarlo_std(all, estimator, options.resamples, options.seed)
                                      : std::numeric_limits<double>::quiet_NaN();
  return e;
}

counts::Estimate analyze_chsh(const analysis::ChshCounts& raw, const analysis::ChshCounts* background,
                              bool background_subtraction, int resamples, std::uint64_t seed) {
  const bool subtract = background && background_subtraction;
  std::vector<double> all = raw.flat();
  if (subtract) {
    auto b = background->flat();
    all.insert(all.end(), b.begin(), b.end());
  }
  auto estimator = [&](std::span<const double> d) {
    std::vector<double> c(d.begin(), d.begin() + 16);
    if (subtract) c = analysis::subtract_background(c, d.subspan(16, 16));
    return analysis::chsh_S(analysis::chsh_from_flat(raw.angles, c));
  };
  counts::Estimate e;
  e.value = estimator(all);
  e.std_error = resamples > 0 ? analysis::montecarlo_std(all, estimator, resamples, seed)
                              : std::numeric_limits<double>::quiet_NaN();
  return e;
}

std::vector<VisibilityResult> analyze_visibility(const formats::VisibilityScan& raw,
                                                 const formats::VisibilityScan* background,
                                                 bool background_subtraction, int resamples, std::uint64_t seed) {
  const bool subtract = background && background_subtraction;
  if (subtract && background->rows.size() != raw.rows.size()) {
    throw InvalidArgument("visibility background does not match the scan");
  }
  std::vector<VisibilityResult> out;
  for (double ta : raw.theta_a_values()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
      if (std::abs(raw.rows[i].theta_a_rad - ta) <= 1e-9) idx.push_back(i);
    }
    std::vector<double> all;
    for (auto i : idx) all.push_back(raw.rows[i].count);
    if (subtract) {
      for (auto i : idx) {
        if (std::abs(background->rows[i].theta_b_rad - raw.rows[i].theta_b_rad) > 1e-9) {
          throw InvalidArgument("visibility background angles do not match the scan");
        }
        all.push_back(background->rows[i].count);
      }
    }
    const std::size_t n = idx.size();
    auto fit = [&](std::span<const double> d) {
      std::vector<double> c(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n));
      if (subtract) c = analysis::subtract_background(c, d.subspan(n, n));
      std::vector<std::pair<double, double>> samples;
      for (std::size_t k = 0; k < n; ++k) samples.emplace_back(raw.rows[idx[k]].theta_b_rad, c[k]);
      return analysis::visibility_fit(samples);
    };
    VisibilityResult r;
    r.theta_a_rad = ta;
    r.fit = fit(all);
    r.montecarlo_std = resamples > 0
                           ? analysis::montecarlo_std(all, [&](std::span<const double> d) { return fit(d).visibility; },
                                                      resamples, seed)
                           : std::numeric_limits<double>::quiet_NaN();
    out.push_back(r);
  }
  return out;
}

CorrelationResult analyze_correlation(const counts::TimestampStream& stream, const CorrelationOptions& o) {
  CorrelationResult r;
  if (o.triggers.empty() || o.stops.empty()) throw InvalidArgument("correlation needs trigger and stop channels");
  std::vector<counts::CoincidenceHistogram> parts;
  for (int t : o.triggers) {
    for (int s : o.stops) parts.push_back(counts::histogram(stream, t, s, o.span_ns));
  }
  r.cross = counts::combine(parts);
  r.g12 = counts::g12_comb_normalized(r.cross, o.peak_window_ns, o.peak_center_ns);
  auto autocorrelation = [&](std::pair<int, int> ch) {
    return counts::g12_comb_normalized(counts::histogram(stream, ch.first, ch.second, o.span_ns), o.peak_window_ns,
                                       std::int64_t{0});
  };
  if (o.auto_signal1) r.g11 = autocorrelation(*o.auto_signal1);
  if (o.auto_signal2) r.g22 = autocorrelation(*o.auto_signal2);
  if (r.g11 && r.g22) r.R = counts::cauchy_schwarz_R(r.g12, *r.g11, *r.g22);
  return r;
}

HbtResult analyze_hbt(const counts::TimestampStream& stream, int herald, int split_a, int split_b) {
  HbtResult r;
  r.counts = counts::hbt_counts(stream, herald, split_a, split_b);
  r.alpha = counts::alpha(r.counts);
  return r;
}

}  // namespace oamstore::pipeline
