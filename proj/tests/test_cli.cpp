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


#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "oamstore/analysis.hpp"
#include "oamstore/counts.hpp"
#include "oamstore/formats.hpp"
#include "oamstore/pipeline.hpp"
#include "oamstore/text.hpp"
#include "oamstore_tools/cli.hpp"
#include "test_util.hpp"

namespace oamstore::tools {
namespace {

using ::testing::HasSubstr;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("oamstore_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write(const fs::path& p, const std::string& content) {
  text::write_file(p.string(), content);
  return p.string();
}

TEST(Cli, VersionAndUsageErrors) {
  auto v = call({"--version"});
  EXPECT_EQ(v.code, kSuccess);
  EXPECT_THAT(v.out, HasSubstr("oamstore"));
  EXPECT_EQ(call({}).code, kUserError);
  EXPECT_EQ(call({"frobnicate"}).code, kUserError);
  EXPECT_EQ(call({"analyze", "tomo"}).code, kUserError);
  EXPECT_EQ(call({"analyze", "tomo", "/nonexistent/table.csv"}).code, kUserError);
  EXPECT_EQ(call({"--help"}).code, kSuccess);
}

TEST(Cli, NoiselessBellTomography) {
  auto dir = scratch("bell");
  auto table = write(dir / "t.csv", formats::to_csv(analysis::expected_counts(testing::phi_plus(), 1e5)));
  auto r = call({"analyze", "tomo", table, "--resamples", "0"});
  EXPECT_EQ(r.code, kSuccess) << r.err;
  EXPECT_THAT(r.out, HasSubstr("fidelity_to_phi_plus: 1.000"));
  auto lin = call({"analyze", "tomo", table, "--method", "linear", "--resamples", "0"});
  EXPECT_THAT(lin.out, HasSubstr("fidelity_to_phi_plus: 1.000"));
  EXPECT_EQ(call({"analyze", "tomo", table, "--method", "svd"}).code, kUserError);
  EXPECT_EQ(call({"analyze", "tomo", table, "--resamples", "50"}).code, kUserError);
}

TEST(Cli, MalformedInputIsUserErrorWithLine) {
  auto dir = scratch("malformed");
  auto bad = write(dir / "bad.csv", "state_a,state_b,count\nL,L,12\nL,X,3\n");
  auto r = call({"analyze", "tomo", bad});
  EXPECT_EQ(r.code, kUserError);
  EXPECT_THAT(r.err, HasSubstr("line 3"));
  auto zero = write(dir / "zero.csv", formats::to_csv(analysis::CountTable16{}));
  EXPECT_EQ(call({"analyze", "tomo", zero, "--resamples", "0"}).code, kUserError);
}

TEST(Cli, EstimatorFailureExitCode) {
  auto dir = scratch("estimator");
  counts::TimestampStream s;
  s.records = {{0, 0}, {1, 380}};
  auto stream = write(dir / "s.txt", counts::to_text(s));
  auto r = call({"analyze", "correlate", stream, "--peak-center", "380"});
  EXPECT_EQ(r.code, kEstimatorFailure);
  EXPECT_THAT(r.err, HasSubstr("estimator failure"));
}

TEST(Cli, ChshAtThreshold) {
  auto dir = scratch("chsh");
  auto angles = analysis::standard_chsh_angles();
  auto rho = werner_state(1.0 / std::numbers::sqrt2, bell_state(BellKind::phi_plus));
  auto rates = analysis::expected_rates(rho, analysis::chsh_settings(angles), 1e5);
  auto file = write(dir / "c.csv", formats::to_csv(analysis::chsh_from_flat(angles, rates)));
  auto r = call({"analyze", "chsh", file, "--resamples", "200", "--out", (dir / "s.csv").string()});
  EXPECT_EQ(r.code, kSuccess) << r.err;
  EXPECT_THAT(r.out, HasSubstr("S: 2.0000 +- "));
  EXPECT_THAT(text::read_file((dir / "s.csv").string()), HasSubstr("quantity,value,std_error"));
}

TEST(Cli, FitMemoryRecoversCurve) {
  auto dir = scratch("fit");
  const memory::EfficiencyFit truth;
  std::vector<std::pair<double, double>> s;
  for (double tau : {67.0, 100.0, 150.0, 200.0, 400.0, 800.0, 1200.0, 1600.0, 2000.0}) s.emplace_back(tau, truth.raw(tau));
  auto file = write(dir / "eff.csv", formats::efficiency_samples_to_csv(s));
  auto out = dir / "fit.csv";
  auto r = call({"analyze", "fit-memory", file, "--out", out.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_THAT(r.out, HasSubstr("g0: -0.0800"));
  EXPECT_THAT(r.out, HasSubstr("A: 0.3800"));
  EXPECT_THAT(r.out, HasSubstr("tau0_ns: 67.0"));
  auto lines = text::lines(text::read_file(out.string()));
  auto f = text::split(lines.at(1), ',');
  EXPECT_NEAR(text::parse_double(f[3], "T"), 1434.0, 1.0);
}

TEST(Cli, SimulateThenAnalyzeMatchesInProcess) {
  auto dir = scratch("roundtrip");
  auto run_dir = dir / "run";
  auto r = call({"simulate", "--config", std::string(OAMSTORE_CONFIG_DIR) + "/calibrated.json", "--seed", "77",
                 "--out", run_dir.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;

  auto cfg = pipeline::parse_run_config(text::read_file(std::string(OAMSTORE_CONFIG_DIR) + "/calibrated.json"));
  cfg.seed = 77;
  auto products = pipeline::simulate(cfg);
  pipeline::TomographyOptions opt;
  opt.resamples = 200;
  opt.seed = 4;
  auto in_process = pipeline::analyze_tomography(*products.tomo, &*products.tomo_background, opt);

  auto est = dir / "tomo.txt";
  auto a = call({"analyze", "tomo", (run_dir / "tomo16_counts.csv").string(), "--background",
                 (run_dir / "tomo16_background.csv").string(), "--resamples", "200", "--seed", "4", "--out",
                 est.string()});
  ASSERT_EQ(a.code, kSuccess) << a.err;
  auto from_cli = formats::tomography_result_from_text(text::read_file(est.string()));
  EXPECT_EQ(from_cli.rho.matrix(), in_process.rho.matrix());
  EXPECT_EQ(from_cli.fidelity_to_ideal, in_process.fidelity_to_ideal);
  EXPECT_EQ(from_cli.fidelity_std, in_process.fidelity_std);

  auto rep = call({"report", run_dir.string(), "--resamples", "0"});
  ASSERT_EQ(rep.code, kSuccess) << rep.err;
  EXPECT_THAT(rep.out, HasSubstr("F_post"));
  EXPECT_TRUE(fs::exists(run_dir / "report.txt"));
  EXPECT_THAT(text::read_file((run_dir / "report.csv").string()), HasSubstr("quantity,value,std_error"));
}

TEST(Cli, CorrelateWritesHistogram) {
  auto dir = scratch("correlate");
  auto cfg = pipeline::parse_run_config(R"({"seed": 2, "source": {"pair_rate_per_window": 0.1,
    "accidental_rate_signal1_per_window": 0.001, "accidental_rate_signal2_per_window": 0.001,
    "transmission_signal1": 1, "transmission_signal2": 1, "n_windows": 20000},
    "memory": {"enabled": false}, "measurement": {"plans": ["correlate"]}})");
  auto products = pipeline::simulate(cfg);
  auto stream = write(dir / "s.txt", counts::to_text(*products.correlate));
  auto hist = dir / "h.csv";
  auto r = call({"analyze", "correlate", stream, "--trigger", "0", "--stop", "1", "--peak-center", "380", "--out",
                 hist.string()});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_THAT(r.out, HasSubstr("g12: "));
  auto h = counts::histogram_from_csv(text::read_file(hist.string()));
  auto direct = counts::histogram(*products.correlate, 0, 1, 2500);
  EXPECT_EQ(h.counts, direct.counts);
  EXPECT_EQ(h.span_ns, direct.span_ns);
}

}  // namespace
}  // namespace oamstore::tools
