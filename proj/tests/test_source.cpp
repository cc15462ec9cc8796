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


#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "oamstore/error.hpp"
#include "oamstore/source.hpp"
#include "test_util.hpp"

namespace oamstore::source {
namespace {

using optics::OpticalPath;

constexpr OpticalPath kSignal2Path{1, false};
constexpr OpticalPath kSignal1Path{5, true};

struct Moments {
  double windows = 0, n = 0, n2 = 0, s1 = 0, s1_pairs = 0;
};

Moments moments(const EmissionRecord& rec) {
  Moments m;
  m.windows = static_cast<double>(rec.window_count);
  for (const auto& w : rec.windows) {
    const double k = static_cast<double>(w.pairs.size());
    m.n += k;
    m.n2 += k * (k - 1);
    const double s = k + w.accidentals_signal1;
    m.s1 += s;
    m.s1_pairs += s * (s - 1);
  }
  return m;
}

TEST(Spectrum, ValidatesNorm) {
  EXPECT_THROW(SchmidtSpectrum({{OamLabel{1}, Complex(0.5)}}), InvalidArgument);
  EXPECT_THROW(SchmidtSpectrum({}), InvalidArgument);
  auto u = SchmidtSpectrum::uniform({-2, -1, 0, 1, 2});
  EXPECT_NEAR(u.probability(OamLabel{2}), 0.2, 1e-15);
  EXPECT_EQ(u.probability(OamLabel{3}), 0.0);
}

TEST(SrsState, TwoTermCase) {
  auto ket = srs_state(SchmidtSpectrum::uniform({1, -1}));
  const OamLabel a[2] = {OamLabel{-1}, OamLabel{1}};  // signal 2 = -l, signal 1 = +l
  const OamLabel b[2] = {OamLabel{1}, OamLabel{-1}};
  const OamLabel off[2] = {OamLabel{1}, OamLabel{1}};
  EXPECT_NEAR(std::abs(ket.amplitude(a)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(ket.amplitude(b)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(ket.amplitude(off), Complex(0.0));
}

TEST(SrsState, UniformFiveModes) {
  auto ket = srs_state(SchmidtSpectrum::uniform({-2, -1, 0, 1, 2}));
  EXPECT_NEAR(ket.amplitudes().norm(), 1.0, 1e-12);
  for (int l = -2; l <= 2; ++l) {
    const OamLabel pair[2] = {OamLabel{-l}, OamLabel{l}};
    EXPECT_NEAR(std::abs(ket.amplitude(pair)), 1.0 / std::sqrt(5.0), 1e-15);
  }
}

TEST(SrsState, ReducedStateCarriesSchmidtWeights) {
  std::map<OamLabel, Complex> c{{OamLabel{-3}, Complex(0.1, 0.2)},
                                {OamLabel{-1}, Complex(0.5, 0.0)},
                                {OamLabel{1}, Complex(0.0, -0.3)},
                                {OamLabel{2}, Complex(0.4, 0.1)}};
  double norm = 0.0;
  for (auto& [l, v] : c) norm += std::norm(v);
  for (auto& [l, v] : c) v /= std::sqrt(norm);
  SchmidtSpectrum spec(c);
  auto rho = DensityMatrix::pure(srs_state(spec));
  const auto d2 = rho.basis().arm_dim(0), d1 = rho.basis().arm_dim(1);
  CMatrix r1 = partial_trace(rho.matrix(), d2, d1, 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r1);
  std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::vector<double> want;
  for (auto& [l, v] : c) want.push_back(std::norm(v));
  while (want.size() < got.size()) want.push_back(0.0);
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(SrsState, SwapArmsAndNegateIsSymmetry) {
  auto rng = testing::engine(40);
  std::map<OamLabel, Complex> c;
  for (int l = -3; l <= 3; ++l) c[OamLabel{l}] = Complex(testing::gaussian(rng), testing::gaussian(rng));
  double norm = 0.0;
  for (auto& [l, v] : c) norm += std::norm(v);
  for (auto& [l, v] : c) v /= std::sqrt(norm);
  auto ket = srs_state(SchmidtSpectrum(c));
  for (int x = -3; x <= 3; ++x) {
    for (int y = -3; y <= 3; ++y) {
      const OamLabel here[2] = {OamLabel{x}, OamLabel{y}};
      const OamLabel there[2] = {OamLabel{-y}, OamLabel{-x}};
      EXPECT_EQ(ket.amplitude(here), ket.amplitude(there));
    }
  }
}

TEST(Postselect, SymmetricSpectrumGivesPhiPlus) {
  auto rho = postselect_2d(srs_state(SchmidtSpectrum::uniform({-2, -1, 1, 2})), 1, kSignal2Path, kSignal1Path);
  EXPECT_NEAR(fidelity(rho, testing::phi_plus()), 1.0, 1e-12);
}

TEST(Postselect, ExtraMirrorGivesPsiPlus) {
  auto rho = postselect_2d(srs_state(SchmidtSpectrum::uniform({-1, 1})), 1, OpticalPath{2, false}, kSignal1Path);
  EXPECT_NEAR(fidelity(rho, DensityMatrix::pure(bell_state(BellKind::psi_plus))), 1.0, 1e-12);
}

TEST(Postselect, AsymmetricSpectrum) {
  SchmidtSpectrum spec({{OamLabel{1}, Complex(std::sqrt(0.8))}, {OamLabel{-1}, Complex(std::sqrt(0.2))}});
  auto rho = postselect_2d(srs_state(spec), 1, kSignal2Path, kSignal1Path);
  CVector want(4);
  want << std::sqrt(0.8), 0.0, 0.0, std::sqrt(0.2);
  EXPECT_LT((rho.matrix() - want * want.adjoint()).norm(), 1e-12);
}

TEST(Postselect, IdempotentWithSameL) {
  auto rng = testing::engine(41);
  std::map<OamLabel, Complex> c;
  for (int l : {-2, -1, 1, 2}) c[OamLabel{l}] = Complex(testing::gaussian(rng), testing::gaussian(rng));
  double norm = 0.0;
  for (auto& [l, v] : c) norm += std::norm(v);
  for (auto& [l, v] : c) v /= std::sqrt(norm);
  const OpticalPath straight{0, false};
  auto once = postselect_2d(srs_state(SchmidtSpectrum(c)), 1, straight, straight);
  auto twice = postselect_2d(once, 1, straight, straight);
  EXPECT_LT((once.matrix() - twice.matrix()).norm(), 1e-12);
}

TEST(Postselect, NoSupportIsAnError) {
  EXPECT_THROW(postselect_2d(srs_state(SchmidtSpectrum::uniform({-2, 2})), 1, kSignal2Path, kSignal1Path),
               InvalidArgument);
}

TEST(Emissions, ZeroRatesGiveEmptyRecord) {
  SourceConfig cfg;
  cfg.pair_rate = 0.0;
  cfg.accidental_rate_signal1 = cfg.accidental_rate_signal2 = 0.0;
  cfg.window_count = 100000;
  auto rec = sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 7);
  EXPECT_TRUE(rec.windows.empty());
  EXPECT_EQ(rec.total_pairs(), 0);
}

TEST(Emissions, SameSeedIsBitIdentical) {
  SourceConfig cfg;
  cfg.pair_rate = 0.05;
  cfg.window_count = 200000;
  auto a = sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 99);
  auto b = sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 99);
  ASSERT_EQ(a.windows.size(), b.windows.size());
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    EXPECT_EQ(a.windows[i].window, b.windows[i].window);
    ASSERT_EQ(a.windows[i].pairs.size(), b.windows[i].pairs.size());
    for (std::size_t k = 0; k < a.windows[i].pairs.size(); ++k) {
      EXPECT_EQ(a.windows[i].pairs[k].signal1, b.windows[i].pairs[k].signal1);
    }
    EXPECT_EQ(a.windows[i].accidentals_signal1, b.windows[i].accidentals_signal1);
    EXPECT_EQ(a.windows[i].accidentals_signal2, b.windows[i].accidentals_signal2);
  }
}

TEST(Emissions, DifferentSeedsAgreeStatistically) {
  SourceConfig cfg;
  cfg.pair_rate = 0.05;
  cfg.window_count = 400000;
  auto a = moments(sample_emissions(cfg, SchmidtSpectrum::uniform({0}), 1));
  auto b = moments(sample_emissions(cfg, SchmidtSpectrum::uniform({0}), 2));
  // var(n) = mu + mu^2 for g2 = 2.
  const double sigma = std::sqrt(2.0 * (0.05 + 0.0025) / cfg.window_count);
  EXPECT_NEAR(a.n / a.windows, b.n / b.windows, 4.0 * sigma);
}

TEST(Emissions, MeanPairRateWithinThreeSigma) {
  SourceConfig cfg;
  cfg.pair_rate = 0.02;
  cfg.window_count = 1'000'000;
  auto m = moments(sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 5));
  // Two thermal modes at mu/2 each: var = mu + mu^2 / 2.
  const double sigma = std::sqrt((cfg.pair_rate + cfg.pair_rate * cfg.pair_rate / 2) / cfg.window_count);
  EXPECT_NEAR(m.n / m.windows, cfg.pair_rate, 3.0 * sigma);
}

TEST(Emissions, SingleArmAutocorrelationIsThermal) {
  SourceConfig cfg;
  cfg.pair_rate = 0.5;
  cfg.accidental_rate_signal1 = cfg.accidental_rate_signal2 = 0.0;
  cfg.window_count = 1'000'000;
  auto m = moments(sample_emissions(cfg, SchmidtSpectrum::uniform({0}), 6));
  const double mean = m.n / m.windows;
  EXPECT_NEAR(m.n2 / m.windows / (mean * mean), 2.0, 0.05);
}

TEST(Emissions, PoissonWhenG2IsOne) {
  SourceConfig cfg;
  cfg.pair_rate = 0.5;
  cfg.thermal_auto_g2 = 1.0;
  cfg.accidental_rate_signal1 = cfg.accidental_rate_signal2 = 0.0;
  cfg.window_count = 1'000'000;
  auto m = moments(sample_emissions(cfg, SchmidtSpectrum::uniform({0}), 6));
  const double mean = m.n / m.windows;
  EXPECT_NEAR(m.n2 / m.windows / (mean * mean), 1.0, 0.02);
}

TEST(Emissions, SecondFactorialMomentMatchesClosedForm) {
  // Independent thermal modes with weights p_l: E[n(n-1)] = mu^2 (1 + (g2 - 1) sum p_l^2).
  SourceConfig cfg;
  cfg.pair_rate = 0.3;
  cfg.thermal_auto_g2 = 1.7;
  cfg.window_count = 1'000'000;
  SchmidtSpectrum spec({{OamLabel{1}, Complex(std::sqrt(0.7))}, {OamLabel{-1}, Complex(std::sqrt(0.3))}});
  const double closed = 0.09 * (1.0 + 0.7 * (0.49 + 0.09));
  EXPECT_NEAR(pair_second_factorial_moment(cfg, spec), closed, 1e-12);
  auto m = moments(sample_emissions(cfg, spec, 8));
  EXPECT_NEAR(m.n2 / m.windows, closed, 0.03 * closed);
}

TEST(Emissions, HeraldedSingleNeverExceedsOnePair) {
  SourceConfig cfg;
  cfg.statistics = PairStatistics::heralded_single;
  cfg.pair_rate = 0.3;
  cfg.window_count = 100000;
  auto rec = sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 9);
  for (const auto& w : rec.windows) EXPECT_LE(w.pairs.size(), 1u);
  EXPECT_EQ(pair_second_factorial_moment(cfg, SchmidtSpectrum::uniform({1, -1})), 0.0);
}

TEST(Emissions, FixedEmitsExactCount) {
  SourceConfig cfg;
  cfg.statistics = PairStatistics::fixed;
  cfg.fixed_pair_count = 2;
  cfg.pair_rate = 0.4;
  cfg.accidental_rate_signal1 = cfg.accidental_rate_signal2 = 0.0;
  cfg.window_count = 100000;
  auto rec = sample_emissions(cfg, SchmidtSpectrum::uniform({1, -1}), 10);
  for (const auto& w : rec.windows) EXPECT_EQ(w.pairs.size(), 2u);
  const double frac = static_cast<double>(rec.windows.size()) / cfg.window_count;
  EXPECT_NEAR(frac, 0.4, 3.0 * std::sqrt(0.24 / cfg.window_count));
}

TEST(Emissions, PairsCarryOppositeLabels) {
  SourceConfig cfg;
  cfg.pair_rate = 0.2;
  cfg.window_count = 20000;
  auto rec = sample_emissions(cfg, SchmidtSpectrum::uniform({-2, 1, 3}), 11);
  for (const auto& w : rec.windows)
    for (const auto& p : w.pairs) EXPECT_EQ(p.signal2.l, -p.signal1.l);
}

TEST(SourceConfig, Validation) {
  SourceConfig cfg;
  cfg.transmission_signal1 = 1.2;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SourceConfig{};
  cfg.pair_rate = -0.1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SourceConfig{};
  cfg.accidental_rate_signal2 = -1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  // 30% x 50% x 60% on signal 1.
  EXPECT_NEAR(SourceConfig{}.transmission_signal1, 0.09, 1e-15);
}

}  // namespace
}  // namespace oamstore::source
