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


#include "oamstore_tools/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oamstore/analysis.hpp"
#include "oamstore/counts.hpp"
#include "oamstore/error.hpp"
#include "oamstore/formats.hpp"
#include "oamstore/pipeline.hpp"
#include "oamstore/text.hpp"

namespace oamstore::tools {
namespace {

namespace fs = std::filesystem;
using analysis::ChshCounts;
using analysis::CountTable16;
using counts::Estimate;

struct CommonFlags {
  bool no_background_subtraction = false;
  int resamples = 200;
  std::uint64_t seed = 1;
  std::string out;
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string pm(const Estimate& e, int digits = 4) {
  if (std::isnan(e.std_error)) return fixed(e.value, digits);
  return fixed(e.value, digits) + " +- " + fixed(e.std_error, digits);
}

void check_resamples(int n) {
  if (n != 0 && n < 100) throw InvalidArgument("--resamples must be 0 (off) or at least 100");
}

std::optional<CountTable16> optional_table(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return formats::count_table_from_csv(text::read_file(path));
}

ChshCounts chsh_subtracted(const ChshCounts& raw, const ChshCounts* bg, bool subtract) {
  if (!bg || !subtract) return raw;
  auto r = raw.flat();
  auto b = bg->flat();
  return analysis::chsh_from_flat(raw.angles, analysis::subtract_background(r, b));
}

std::array<double, 4> correlators(const ChshCounts& c) {
  auto e = [&](int row, int col) {
    const auto& n = c.counts;
    return analysis::chsh_E(n[row][col], n[row + 1][col + 1], n[row + 1][col], n[row][col + 1]);
  };
  return {e(0, 0), e(0, 2), e(2, 0), e(2, 2)};
}

// ---- analyze ---------------------------------------------------------------

struct TomoArgs {
  std::string input, background, method = "mle";
};

int analyze_tomo(const TomoArgs& a, const CommonFlags& f, std::ostream& out) {
  check_resamples(f.resamples);
  auto raw = formats::count_table_from_csv(text::read_file(a.input));
  auto bg = optional_table(a.background);
  pipeline::TomographyOptions opts;
  if (a.method == "linear") {
    opts.method = analysis::TomographyMethod::linear;
  } else if (a.method != "mle") {
    throw InvalidArgument("--method must be mle or linear, got '" + a.method + "'");
  }
  opts.background_subtraction = !f.no_background_subtraction;
  opts.resamples = f.resamples;
  opts.seed = f.seed;
  auto result = pipeline::analyze_tomography(raw, bg ? &*bg : nullptr, opts);

  out << "method: " << a.method << "\n";
  out << "background_subtraction: " << (bg && opts.background_subtraction ? "on" : "off") << "\n";
  if (opts.method == analysis::TomographyMethod::mle) {
    out << "converged: " << (result.converged ? "yes" : "no") << " (iterations " << result.iterations << ")\n";
    out << "log_likelihood: " << text::format_double(result.log_likelihood) << "\n";
  }
  out << "fidelity_to_phi_plus: " << pm({result.fidelity_to_ideal, result.fidelity_std}) << "\n";
  out << "rho:\n" << to_text(result.rho);
  if (!f.out.empty()) text::write_file(f.out, formats::to_text(result));
  return result.converged ? kSuccess : kEstimatorFailure;
}

struct ChshArgs {
  std::string input, background;
};

int analyze_chsh(const ChshArgs& a, const CommonFlags& f, std::ostream& out) {
  check_resamples(f.resamples);
  auto raw = formats::chsh_counts_from_csv(text::read_file(a.input));
  std::optional<ChshCounts> bg;
  if (!a.background.empty()) bg = formats::chsh_counts_from_csv(text::read_file(a.background));
  const bool subtract = !f.no_background_subtraction;
  auto s = pipeline::analyze_chsh(raw, bg ? &*bg : nullptr, subtract, f.resamples, f.seed);
  auto e = correlators(chsh_subtracted(raw, bg ? &*bg : nullptr, subtract));

  out << "background_subtraction: " << (bg && subtract ? "on" : "off") << "\n";
  out << "E(a,b): " << fixed(e[0]) << "\n";
  out << "E(a,b'): " << fixed(e[1]) << "\n";
  out << "E(a',b): " << fixed(e[2]) << "\n";
  out << "E(a',b'): " << fixed(e[3]) << "\n";
  out << "S: " << pm(s) << "\n";
  out << "violation: " << (s.value > 2.0 ? "yes" : "no") << "\n";
  if (!f.out.empty()) {
    text::write_file(f.out, "quantity,value,std_error\nE_ab," + text::format_double(e[0]) + ",nan\nE_abp," +
                                text::format_double(e[1]) + ",nan\nE_apb," + text::format_double(e[2]) +
                                ",nan\nE_apbp," + text::format_double(e[3]) + ",nan\nS," +
                                text::format_double(s.value) + "," + text::format_double(s.std_error) + "\n");
  }
  return kSuccess;
}

struct VisibilityArgs {
  std::string input, background;
};

int analyze_visibility(const VisibilityArgs& a, const CommonFlags& f, std::ostream& out) {
  check_resamples(f.resamples);
  auto raw = formats::visibility_scan_from_csv(text::read_file(a.input));
  std::optional<formats::VisibilityScan> bg;
  if (!a.background.empty()) bg = formats::visibility_scan_from_csv(text::read_file(a.background));
  auto results =
      pipeline::analyze_visibility(raw, bg ? &*bg : nullptr, !f.no_background_subtraction, f.resamples, f.seed);
  std::string csv = "theta_a_rad,visibility,fit_std,montecarlo_std,phase_rad,offset\n";
  for (const auto& r : results) {
    out << "theta_a=" << fixed(r.theta_a_rad) << " rad: V = " << fixed(r.fit.visibility) << " +- "
        << fixed(r.fit.std_error) << " (fit)";
    if (!std::isnan(r.montecarlo_std)) out << ", +- " << fixed(r.montecarlo_std) << " (MC)";
    out << ", phase " << fixed(r.fit.phase_rad) << " rad\n";
    csv += text::format_double(r.theta_a_rad) + "," + text::format_double(r.fit.visibility) + "," +
           text::format_double(r.fit.std_error) + "," + text::format_double(r.montecarlo_std) + "," +
           text::format_double(r.fit.phase_rad) + "," + text::format_double(r.fit.offset) + "\n";
  }
  if (!f.out.empty()) text::write_file(f.out, csv);
  return kSuccess;
}

struct HbtArgs {
  std::string input;
  int herald = 1, split_a = 2, split_b = 3;
};

int analyze_hbt(const HbtArgs& a, const CommonFlags& f, std::ostream& out) {
  auto stream = counts::timestamp_stream_from_text(text::read_file(a.input));
  auto r = pipeline::analyze_hbt(stream, a.herald, a.split_a, a.split_b);
  out << "P1: " << r.counts.p1 << "\nP12: " << r.counts.p12 << "\nP13: " << r.counts.p13
      << "\nP123: " << r.counts.p123 << "\nalpha: " << pm(r.alpha) << "\n";
  if (!f.out.empty()) {
    text::write_file(f.out, "p1,p12,p13,p123,alpha,std_error\n" + std::to_string(r.counts.p1) + "," +
                                std::to_string(r.counts.p12) + "," + std::to_string(r.counts.p13) + "," +
                                std::to_string(r.counts.p123) + "," + text::format_double(r.alpha.value) + "," +
                                text::format_double(r.alpha.std_error) + "\n");
  }
  return kSuccess;
}

struct CorrelateArgs {
  std::string input;
  std::vector<int> triggers{0}, stops{1};
  std::int64_t span_ns = 2500;
  double peak_window_ns = 200.0;
  std::optional<std::int64_t> peak_center_ns;
  std::vector<int> auto_signal1, auto_signal2;
};

std::optional<std::pair<int, int>> channel_pair(const std::vector<int>& v, const char* flag) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 2) throw InvalidArgument(std::string(flag) + " takes two channels");
  return std::pair{v[0], v[1]};
}

int analyze_correlate(const CorrelateArgs& a, const CommonFlags& f, std::ostream& out) {
  auto stream = counts::timestamp_stream_from_text(text::read_file(a.input));
  pipeline::CorrelationOptions o;
  o.triggers = a.triggers;
  o.stops = a.stops;
  o.span_ns = a.span_ns;
  o.peak_window_ns = a.peak_window_ns;
  o.peak_center_ns = a.peak_center_ns;
  o.auto_signal1 = channel_pair(a.auto_signal1, "--auto-signal1");
  o.auto_signal2 = channel_pair(a.auto_signal2, "--auto-signal2");
  auto r = pipeline::analyze_correlation(stream, o);
  out << "coincidences: " << r.cross.total() << "\n";
  out << "g12: " << pm(r.g12, 3) << "\n";
  if (r.g11) out << "g11: " << pm(*r.g11, 3) << "\n";
  if (r.g22) out << "g22: " << pm(*r.g22, 3) << "\n";
  if (r.R) out << "R: " << pm(*r.R, 2) << (r.R->value > 1.0 ? " (non-classical)" : "") << "\n";
  if (!f.out.empty()) text::write_file(f.out, counts::to_csv(r.cross));
  return kSuccess;
}

struct FitArgs {
  std::string input;
  std::optional<double> report_tau0_ns;
};

int analyze_fit_memory(const FitArgs& a, const CommonFlags& f, std::ostream& out) {
  auto samples = formats::efficiency_samples_from_csv(text::read_file(a.input));
  auto r = analysis::fit_exponential(samples);
  auto shown = a.report_tau0_ns ? r.fit.rebased(*a.report_tau0_ns) : r.fit;
  out << "g0: " << fixed(shown.g0) << "\nA: " << fixed(shown.amplitude) << "\ntau0_ns: " << fixed(shown.tau0_ns, 1)
      << "\nT_ns: " << fixed(shown.decay_ns, 1) << "\nresidual_norm: " << text::format_double(r.residual_norm)
      << "\n";
  if (!f.out.empty()) {
    text::write_file(f.out, "g0,A,tau0_ns,T_ns,residual_norm\n" + text::format_double(shown.g0) + "," +
                                text::format_double(shown.amplitude) + "," + text::format_double(shown.tau0_ns) +
                                "," + text::format_double(shown.decay_ns) + "," +
                                text::format_double(r.residual_norm) + "\n");
  }
  return kSuccess;
}

// ---- simulate / report -----------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  pipeline::RunConfig config;
  if (!a.config.empty()) config = pipeline::parse_run_config(text::read_file(a.config));
  if (a.seed) config.seed = *a.seed;
  if (!a.out.empty()) config.output_dir = a.out;
  auto products = pipeline::simulate(config);
  auto files = pipeline::write_products(config, products, config.output_dir);
  out << "wrote " << files.size() << " files to " << config.output_dir << "\n";
  for (const auto& name : files) out << "  " << name << "\n";
  return kSuccess;
}

struct ReportArgs {
  std::string run_dir;
};

class Report {
 public:
  void section(const std::string& title) { text_ << "\n[" << title << "]\n"; }
  void note(const std::string& line) { text_ << line << "\n"; }
  void value(const std::string& key, const Estimate& e, int digits = 4) {
    text_ << key << ": " << pm(e, digits) << "\n";
    csv_ << key << "," << text::format_double(e.value) << "," << text::format_double(e.std_error) << "\n";
  }
  std::string text() const { return text_.str(); }
  std::string csv() const { return "quantity,value,std_error\n" + csv_.str(); }

 private:
  std::ostringstream text_, csv_;
};

int report(const ReportArgs& a, const CommonFlags& f, std::ostream& out) {
  check_resamples(f.resamples);
  const fs::path dir(a.run_dir);
  auto manifest = nlohmann::json::parse(text::read_file((dir / "manifest.json").string()), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("config")) {
    throw InvalidArgument("'" + (dir / "manifest.json").string() + "' is not an oamstore manifest");
  }
  auto config = pipeline::parse_run_config(manifest["config"].dump());
  auto has = [&](const char* name) { return fs::exists(dir / name); };
  auto path = [&](const char* name) { return (dir / name).string(); };
  auto table = [&](const char* name) -> std::optional<CountTable16> {
    if (!has(name)) return std::nullopt;
    return formats::count_table_from_csv(text::read_file(path(name)));
  };
  auto chsh = [&](const char* name) -> std::optional<ChshCounts> {
    if (!has(name)) return std::nullopt;
    return formats::chsh_counts_from_csv(text::read_file(path(name)));
  };
  auto ptr = [](auto& opt) { return opt ? &*opt : nullptr; };

  const bool subtract = !f.no_background_subtraction;
  const bool stored = config.memory.enabled;
  const std::string post = stored ? "post-storage (" + fixed(config.memory.storage_time_ns, 0) + " ns)" : "no storage";

  Report r;
  r.note("oamstore run report: " + dir.string());
  r.note("seed " + std::to_string(config.seed) + ", background subtraction " + (subtract ? "on" : "off") +
         ", Monte Carlo resamples " + std::to_string(f.resamples));
  r.note("CALIBRATION: model parameters (memory noise, arm crosstalk) were tuned so the default");
  r.note("pipeline lands near the published numbers. Agreement shows model adequacy; it is not an");
  r.note("independent reproduction of the experiment.");

  pipeline::TomographyOptions topts;
  topts.background_subtraction = subtract;
  topts.resamples = f.resamples;
  topts.seed = f.seed;

  auto tomo = table("tomo16_counts.csv");
  auto tomo_bg = table("tomo16_background.csv");
  auto tomo_pre = table("tomo16_pre_counts.csv");
  auto tomo_pre_bg = table("tomo16_pre_background.csv");
  if (tomo || tomo_pre) {
    r.section("tomography (MLE), fidelity to phi_plus");
    if (tomo_pre) {
      auto t = pipeline::analyze_tomography(*tomo_pre, ptr(tomo_pre_bg), topts);
      r.value("F_pre", {t.fidelity_to_ideal, t.fidelity_std});
    }
    if (tomo) {
      auto t = pipeline::analyze_tomography(*tomo, ptr(tomo_bg), topts);
      r.value(stored ? "F_post" : "F", {t.fidelity_to_ideal, t.fidelity_std});
    }
    if (tomo && tomo_pre) {
      r.value("F2_post_vs_pre", pipeline::state_fidelity(*tomo, ptr(tomo_bg), *tomo_pre, ptr(tomo_pre_bg), topts));
    }
    r.note("reference: " + post + " state model fidelity " +
           fixed(fidelity(pipeline::prepared_state(config, stored).rho, DensityMatrix::pure(bell_state(BellKind::phi_plus)))));
  }

  auto ch = chsh("chsh_counts.csv");
  auto ch_bg = chsh("chsh_background.csv");
  auto ch_pre = chsh("chsh_pre_counts.csv");
  auto ch_pre_bg = chsh("chsh_pre_background.csv");
  if (ch || ch_pre) {
    r.section("CHSH");
    if (ch_pre) r.value("S_pre", pipeline::analyze_chsh(*ch_pre, ptr(ch_pre_bg), subtract, f.resamples, f.seed));
    if (ch) r.value(stored ? "S_post" : "S", pipeline::analyze_chsh(*ch, ptr(ch_bg), subtract, f.resamples, f.seed));
  }

  if (has("visibility_counts.csv")) {
    auto raw = formats::visibility_scan_from_csv(text::read_file(path("visibility_counts.csv")));
    std::optional<formats::VisibilityScan> bg;
    if (has("visibility_background.csv")) {
      bg = formats::visibility_scan_from_csv(text::read_file(path("visibility_background.csv")));
    }
    r.section("visibility");
    for (const auto& v : pipeline::analyze_visibility(raw, ptr(bg), subtract, f.resamples, f.seed)) {
      const double err = std::isnan(v.montecarlo_std) ? v.fit.std_error : v.montecarlo_std;
      r.value("V_theta_a_" + fixed(v.theta_a_rad, 4), {v.fit.visibility, err});
    }
  }

  if (has("correlate_stream.txt")) {
    auto stream = counts::timestamp_stream_from_text(text::read_file(path("correlate_stream.txt")));
    auto channels = counts::ChannelMap::correlation();
    pipeline::CorrelationOptions o;
    o.triggers = channels.signal1;
    o.stops = channels.signal2;
    o.span_ns = config.measurement.hist_span_ns;
    o.peak_window_ns = config.measurement.peak_window_ns;
    o.peak_center_ns = config.source.pair_delay_ns;
    o.auto_signal1 = std::pair{channels.signal1.at(0), channels.signal1.at(1)};
    o.auto_signal2 = std::pair{channels.signal2.at(0), channels.signal2.at(1)};
    r.section("correlation");
    try {
      auto c = pipeline::analyze_correlation(stream, o);
      r.value("g12", c.g12, 3);
      if (c.g11) r.value("g11", *c.g11, 3);
      if (c.g22) r.value("g22", *c.g22, 3);
      if (c.R) r.value("R", *c.R, 2);
      text::write_file(path("correlate_histogram.csv"), counts::to_csv(c.cross));
    } catch (const EstimatorFailure& e) {
      r.note(std::string("not estimable: ") + e.what());
    }
  }

  if (has("hbt_stream.txt")) {
    auto stream = counts::timestamp_stream_from_text(text::read_file(path("hbt_stream.txt")));
    auto channels = counts::ChannelMap::hbt();
    r.section("HBT");
    try {
      auto h = pipeline::analyze_hbt(stream, channels.signal2.at(0), channels.signal1.at(0), channels.signal1.at(1));
      r.value("alpha", h.alpha);
    } catch (const EstimatorFailure& e) {
      r.note(std::string("not estimable: ") + e.what());
    }
  }

  const fs::path target = f.out.empty() ? dir / "report.txt" : fs::path(f.out);
  fs::path csv_target = target;
  csv_target.replace_extension(".csv");
  text::write_file(target.string(), r.text());
  text::write_file(csv_target.string(), r.csv());
  out << r.text();
  return kSuccess;
}

void add_common(CLI::App* app, CommonFlags& f, bool resampling) {
  app->add_option("--out", f.out, "Output file");
  if (resampling) {
    app->add_flag("--no-background-subtraction", f.no_background_subtraction,
                  "Use raw counts even when a background table is given");
    app->add_option("--resamples", f.resamples, "Monte Carlo resamples (0 disables, otherwise >= 100)");
    app->add_option("--seed", f.seed, "Seed of the Monte Carlo resampling");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entangled OAM storage simulator and analysis toolkit", "oamstore"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "oamstore 0.1.0");

  CommonFlags common;
  int code = kSuccess;
  std::function<int()> action;

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Simulate a run and write count tables and streams");
  cmd_sim->add_option("--config", sim.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  cmd_sim->add_option("--seed", sim.seed, "Override the configured seed");
  cmd_sim->add_option("--out", sim.out, "Override the configured output directory");
  cmd_sim->callback([&] { action = [&] { return simulate(sim, out); }; });

  auto* cmd_an = app.add_subcommand("analyze", "Run an estimator on simulated or measured data");
  cmd_an->require_subcommand(1);

  TomoArgs tomo;
  auto* an_tomo = cmd_an->add_subcommand("tomo", "16-setting tomography");
  an_tomo->add_option("counts", tomo.input, "Count table CSV")->required()->check(CLI::ExistingFile);
  an_tomo->add_option("--background", tomo.background, "Background count table CSV")->check(CLI::ExistingFile);
  an_tomo->add_option("--method", tomo.method, "mle or linear");
  add_common(an_tomo, common, true);
  an_tomo->callback([&] { action = [&] { return analyze_tomo(tomo, common, out); }; });

  ChshArgs chsh;
  auto* an_chsh = cmd_an->add_subcommand("chsh", "CHSH parameter S");
  an_chsh->add_option("counts", chsh.input, "CHSH count CSV")->required()->check(CLI::ExistingFile);
  an_chsh->add_option("--background", chsh.background, "Background CHSH CSV")->check(CLI::ExistingFile);
  add_common(an_chsh, common, true);
  an_chsh->callback([&] { action = [&] { return analyze_chsh(chsh, common, out); }; });

  VisibilityArgs vis;
  auto* an_vis = cmd_an->add_subcommand("visibility", "Two-photon interference visibility");
  an_vis->add_option("counts", vis.input, "Visibility scan CSV")->required()->check(CLI::ExistingFile);
  an_vis->add_option("--background", vis.background, "Background scan CSV")->check(CLI::ExistingFile);
  add_common(an_vis, common, true);
  an_vis->callback([&] { action = [&] { return analyze_visibility(vis, common, out); }; });

  HbtArgs hbt;
  auto* an_hbt = cmd_an->add_subcommand("hbt", "Heralded anti-correlation alpha");
  an_hbt->add_option("stream", hbt.input, "Timestamp stream")->required()->check(CLI::ExistingFile);
  an_hbt->add_option("--herald", hbt.herald, "Herald channel");
  an_hbt->add_option("--split-a", hbt.split_a, "First beam-splitter output channel");
  an_hbt->add_option("--split-b", hbt.split_b, "Second beam-splitter output channel");
  add_common(an_hbt, common, false);
  an_hbt->callback([&] { action = [&] { return analyze_hbt(hbt, common, out); }; });

  CorrelateArgs cor;
  auto* an_cor = cmd_an->add_subcommand("correlate", "Coincidence histogram, g12 and Cauchy-Schwarz R");
  an_cor->add_option("stream", cor.input, "Timestamp stream")->required()->check(CLI::ExistingFile);
  an_cor->add_option("--trigger", cor.triggers, "Trigger channel(s)");
  an_cor->add_option("--stop", cor.stops, "Stop channel(s)");
  an_cor->add_option("--span", cor.span_ns, "Histogram half-span in ns");
  an_cor->add_option("--peak-window", cor.peak_window_ns, "Integration window per comb peak in ns");
  an_cor->add_option("--peak-center", cor.peak_center_ns, "Delay of the correlated peak (default: maximum bin)");
  an_cor->add_option("--auto-signal1", cor.auto_signal1, "Channel pair for g11")->expected(2);
  an_cor->add_option("--auto-signal2", cor.auto_signal2, "Channel pair for g22")->expected(2);
  add_common(an_cor, common, false);
  an_cor->callback([&] { action = [&] { return analyze_correlate(cor, common, out); }; });

  FitArgs fit;
  auto* an_fit = cmd_an->add_subcommand("fit-memory", "Fit g0 + A exp(-(tau - tau0)/T) to efficiency samples");
  an_fit->add_option("samples", fit.input, "tau_ns,efficiency CSV")->required()->check(CLI::ExistingFile);
  an_fit->add_option("--tau0", fit.report_tau0_ns, "Report A at this reference delay");
  add_common(an_fit, common, false);
  an_fit->callback([&] { action = [&] { return analyze_fit_memory(fit, common, out); }; });

  ReportArgs rep;
  auto* cmd_rep = app.add_subcommand("report", "Summarise a run directory");
  cmd_rep->add_option("run_dir", rep.run_dir, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);
  add_common(cmd_rep, common, true);
  cmd_rep->callback([&] { action = [&] { return report(rep, common, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUserError;
  }

  try {
    code = action ? action() : kUserError;
  } catch (const InvalidArgument& e) {
    err << "oamstore: error: " << e.what() << "\n";
    return kUserError;
  } catch (const EstimatorFailure& e) {
    err << "oamstore: estimator failure: " << e.what() << "\n";
    return kEstimatorFailure;
  } catch (const std::exception& e) {
    err << "oamstore: internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return code;
}

}  // namespace oamstore::tools
