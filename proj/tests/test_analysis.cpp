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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oamstore/analysis.hpp"
#include "oamstore/error.hpp"
#include "oamstore/random.hpp"
#include "test_util.hpp"

namespace oamstore::analysis {
namespace {

using optics::Conjugation;
using optics::SectorAngle;
using std::numbers::pi;
using testing::phi_plus;

CountTable16 poisson_table(const CountTable16& mean, std::uint64_t index) {
  random::Engine rng(404, random::Stream::test, index);
  CountTable16 t = mean;
  for (auto& row : t.counts)
    for (auto& c : row) c = static_cast<double>(std::poisson_distribution<long>(c)(rng));
  return t;
}

ChshCounts chsh_counts_for(const DensityMatrix& rho, double scale = 1.0) {
  auto angles = standard_chsh_angles();
  return chsh_from_flat(angles, expected_rates(rho, chsh_settings(angles), scale));
}

std::vector<std::pair<double, double>> fringe(const DensityMatrix& rho, double theta_a, double scale) {
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < 12; ++k) {
    const double tb = k * pi / 12;
    auto s = optics::sector_setting(SectorAngle(theta_a), SectorAngle(tb), Conjugation::identity,
                                    Conjugation::conjugate);
    out.emplace_back(tb, expected_rates(rho, {s}, scale).front());
  }
  return out;
}

TEST(ExpectedCounts, BornRule) {
  auto t = expected_counts(phi_plus(), 1000.0);
  EXPECT_NEAR(t.counts[0][0], 500.0, 1e-10);
  EXPECT_NEAR(t.counts[0][1], 0.0, 1e-10);
  auto m = expected_counts(DensityMatrix::maximally_mixed(Basis::two_qubit()), 1000.0);
  for (const auto& row : m.counts)
    for (double c : row) EXPECT_NEAR(c, 250.0, 1e-10);
  EXPECT_THROW(expected_counts(phi_plus(), 0.0), InvalidArgument);
}

TEST(CountTable, ValidatesAndFlattens) {
  CountTable16 t;
  t.counts[2][1] = 7.0;
  auto flat = t.flat();
  EXPECT_EQ(flat[2 * 4 + 1], 7.0);
  EXPECT_EQ(CountTable16::from_flat(flat).counts, t.counts);
  t.counts[0][0] = -1.0;
  EXPECT_THROW(t.validate(), InvalidArgument);
}

TEST(Background, SubtractionClampsAtZero) {
  std::vector<double> raw{10, 5, 0};
  std::vector<double> bg{3, 7, 1};
  EXPECT_EQ(subtract_background(raw, bg), (std::vector<double>{7, 0, 0}));
  std::vector<double> short_bg{1};
  EXPECT_THROW(subtract_background(raw, short_bg), InvalidArgument);
}

TEST(TomoLinear, NoiselessBell) {
  auto r = tomo_linear(expected_counts(phi_plus(), 1e6));
  EXPECT_GE(r.fidelity_to_ideal, 0.9999);
  EXPECT_EQ(r.method, TomographyMethod::linear);
  EXPECT_TRUE(std::isnan(r.log_likelihood));
}

TEST(TomoLinear, NoiselessWerner) {
  auto r = tomo_linear(expected_counts(werner_state(0.852, bell_state(BellKind::phi_plus)), 1e6));
  EXPECT_NEAR(r.fidelity_to_ideal, (3 * 0.852 + 1) / 4, 0.001);
}

TEST(TomoLinear, InvertsForwardModelExactly) {
  auto rng = testing::engine(60);
  for (int i = 0; i < 50; ++i) {
    auto rho = testing::random_density(rng);
    auto r = tomo_linear(expected_counts(rho, 1e4));
    EXPECT_LT((r.raw - rho.matrix()).norm(), 1e-10);
  }
}

TEST(TomoLinear, LowCountTablesRepairToPhysical) {
  auto truth = werner_state(0.9, bell_state(BellKind::phi_plus));
  auto mean = expected_counts(truth, 2000.0);  // about 500 counts on the strong settings
  std::vector<double> fids;
  for (int i = 0; i < 200; ++i) {
    auto r = tomo_linear(poisson_table(mean, static_cast<std::uint64_t>(i)));
    EXPECT_TRUE(testing::is_physical(r.rho));
    fids.push_back(r.fidelity_to_ideal);
  }
  double m = 0, v = 0;
  for (double f : fids) m += f / fids.size();
  for (double f : fids) v += (f - m) * (f - m) / (fids.size() - 1);
  const double truth_f = fidelity(truth, phi_plus());
  EXPECT_NEAR(m, truth_f, 3.0 * std::sqrt(v));
}

TEST(TomoMle, NoiselessBellAndWerner) {
  auto r = tomo_mle(expected_counts(phi_plus(), 1e5));
  EXPECT_GE(r.fidelity_to_ideal, 0.999);
  EXPECT_TRUE(testing::is_physical(r.rho));
  auto w = werner_state(0.852, bell_state(BellKind::phi_plus));
  auto rw = tomo_mle(expected_counts(w, 1e5));
  EXPECT_GE(fidelity(rw.rho, w), 0.999);
}

TEST(TomoMle, AgreesWithLinearOnNoiselessTables) {
  auto rng = testing::engine(61);
  for (int i = 0; i < 20; ++i) {
    auto rho = testing::random_density(rng, 1 + i % 4);
    auto table = expected_counts(rho, 1e5);
    auto lin = tomo_linear(table);
    auto mle = tomo_mle(table);
    EXPECT_GE(fidelity(lin.rho, mle.rho), 0.999) << i;
  }
}

TEST(TomoMle, LikelihoodNeverDecreases) {
  MleOptions opt;
  opt.record_trace = true;
  for (int i = 0; i < 20; ++i) {
    auto table = poisson_table(expected_counts(werner_state(0.8, bell_state(BellKind::phi_plus)), 400.0),
                               1000 + static_cast<std::uint64_t>(i));
    auto r = tomo_mle(table, opt);
    ASSERT_GE(r.log_likelihood_trace.size(), 2u);
    for (std::size_t k = 1; k < r.log_likelihood_trace.size(); ++k) {
      EXPECT_GE(r.log_likelihood_trace[k], r.log_likelihood_trace[k - 1] - 1e-9) << i << " step " << k;
    }
  }
}

TEST(TomoMle, ReportsNonConvergenceWithBestIterate) {
  MleOptions opt;
  opt.max_iterations = 2;
  auto table = poisson_table(expected_counts(werner_state(0.8, bell_state(BellKind::phi_plus)), 400.0), 7);
  auto r = tomo_mle(table, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_TRUE(testing::is_physical(r.rho));
  EXPECT_GT(r.fidelity_to_ideal, 0.5);
}

TEST(TomoMle, ZeroTableIsRejected) {
  EXPECT_THROW(tomo_mle(CountTable16{}), InvalidArgument);
}

TEST(TomoMle, HandlesZeroCountSettings) {
  auto r = tomo_mle(expected_counts(phi_plus(), 300.0));
  EXPECT_TRUE(testing::is_physical(r.rho));
  EXPECT_TRUE(std::isfinite(r.log_likelihood));
}

TEST(TomoMle, CholeskyParametrisationRoundTrip) {
  auto rng = testing::engine(62);
  for (int i = 0; i < 50; ++i) {
    auto rho = testing::random_density(rng);
    auto t = cholesky_parameters(rho);
    ASSERT_EQ(t.size(), 16u);
    EXPECT_LT((density_from_parameters(t).matrix() - rho.matrix()).norm(), 1e-10);
  }
}

TEST(TomoMle, GradientMatchesFiniteDifferences) {
  auto rng = testing::engine(63);
  auto table = poisson_table(expected_counts(testing::random_density(rng), 1000.0), 3);
  auto t = cholesky_parameters(testing::random_density(rng));
  auto g = likelihood_gradient(table, t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    auto up = t, down = t;
    const double h = 1e-6;
    up[k] += h;
    down[k] -= h;
    const double fd = (likelihood_at(table, up) - likelihood_at(table, down)) / (2 * h);
    EXPECT_NEAR(g[k], fd, 1e-4 * std::max(1.0, std::abs(fd))) << k;
  }
}

TEST(TomoMle, OutputsPhysicalOnRandomTables) {
  random::Engine rng(65);
  for (int i = 0; i < 300; ++i) {
    CountTable16 t;
    for (auto& row : t.counts)
      for (auto& c : row) c = std::floor(rng.uniform() * 50.0);
    t.counts[0][0] += 1.0;
    auto r = tomo_mle(t);
    EXPECT_TRUE(testing::is_physical(r.rho)) << i;
  }
}

TEST(ChshE, Values) {
  EXPECT_DOUBLE_EQ(chsh_E(1, 1, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(chsh_E(3, 3, 3, 3), 0.0);
  EXPECT_DOUBLE_EQ(chsh_E(2, 5, 1, 7), chsh_E(20, 50, 10, 70));
  EXPECT_THROW(chsh_E(0, 0, 0, 0), EstimatorFailure);
}

TEST(ChshE, BellAtEighthTurn) {
  auto c = chsh_counts_for(phi_plus());
  // Row a = 0, column b = pi/8.
  const auto& n = c.counts;
  EXPECT_NEAR(chsh_E(n[0][0], n[1][1], n[1][0], n[0][1]), std::cos(pi / 4), 1e-12);
}

TEST(ChshS, IdealBellReachesTsirelson) {
  EXPECT_NEAR(chsh_S(chsh_counts_for(phi_plus())), 2.0 * std::numbers::sqrt2, 1e-9);
}

TEST(ChshS, WernerScalesLinearly) {
  auto base = bell_state(BellKind::phi_plus);
  EXPECT_NEAR(chsh_S(chsh_counts_for(werner_state(0.852, base))), 2.0 * std::numbers::sqrt2 * 0.852, 1e-9);
  EXPECT_NEAR(chsh_S(chsh_counts_for(werner_state(0.852, base))), 2.41, 0.005);
  EXPECT_NEAR(chsh_S(chsh_counts_for(werner_state(1.0 / std::numbers::sqrt2, base))), 2.0, 1e-9);
}

TEST(ChshS, SignedCombination) {
  EXPECT_DOUBLE_EQ(chsh_S(0.5, 0.25, 0.125, 0.0625), 0.5 - 0.25 + 0.125 + 0.0625);
}

TEST(ChshS, TsirelsonBoundOnRandomStates) {
  auto rng = testing::engine(66);
  for (int i = 0; i < 1000; ++i) {
    auto rho = testing::random_density(rng, 1 + i % 4);
    EXPECT_LE(std::abs(chsh_S(chsh_counts_for(rho))), 2.0 * std::numbers::sqrt2 + 1e-9);
  }
}

TEST(ChshS, PsiPlusNeedsFlippedArm) {
  // Without the path flip, psi_plus gives no violation at these angles.
  auto psi = DensityMatrix::pure(bell_state(BellKind::psi_plus));
  EXPECT_LT(std::abs(chsh_S(chsh_counts_for(psi))), 2.0);
}

TEST(Visibility, PureFringe) {
  auto f = visibility_fit(fringe(phi_plus(), 0.0, 1000.0));
  EXPECT_NEAR(f.visibility, 1.0, 0.001);
  EXPECT_NEAR(f.phase_rad, 0.0, 1e-9);
}

TEST(Visibility, WernerWeight) {
  for (double p : {0.5, 0.85}) {
    for (double ta : {0.0, pi / 4}) {
      auto f = visibility_fit(fringe(werner_state(p, bell_state(BellKind::phi_plus)), ta, 1000.0));
      EXPECT_NEAR(f.visibility, p, 1e-9);
      EXPECT_NEAR(std::remainder(f.phase_rad - ta, pi), 0.0, 1e-9);
    }
  }
}

TEST(Visibility, DegenerateSampling) {
  std::vector<std::pair<double, double>> same{{0.1, 1}, {0.1, 2}, {0.1, 3}, {0.1, 4}};
  EXPECT_THROW(visibility_fit(same), InvalidArgument);
  std::vector<std::pair<double, double>> three{{0.0, 1}, {0.5, 2}, {1.0, 3}};
  EXPECT_THROW(visibility_fit(three), InvalidArgument);
  // Angles equal modulo pi count once.
  std::vector<std::pair<double, double>> aliased{{0.0, 1}, {pi, 2}, {0.5, 3}, {0.5 + pi, 4}, {1.0, 2}};
  EXPECT_THROW(visibility_fit(aliased), InvalidArgument);
}

TEST(Visibility, RescalingInvariant) {
  auto a = fringe(werner_state(0.7, bell_state(BellKind::phi_plus)), 0.3, 100.0);
  auto b = a;
  for (auto& s : b) s.second *= 13.0;
  EXPECT_NEAR(visibility_fit(a).visibility, visibility_fit(b).visibility, 1e-12);
}

std::vector<std::pair<double, double>> reference_curve(double noise, std::uint64_t seed) {
  const memory::EfficiencyFit truth;
  random::Engine rng(seed, random::Stream::test, 7);
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k < 12; ++k) {
    const double tau = 67.0 + k * 357.0;  // 67 to 3994 ns, about 2.7 decay times
    s.emplace_back(tau, truth.raw(tau) * (1.0 + noise * testing::gaussian(rng)));
  }
  return s;
}

TEST(FitExponential, NoiselessRecovery) {
  auto r = fit_exponential(reference_curve(0.0, 0));
  EXPECT_NEAR(r.fit.g0, -0.08, 0.0008);
  EXPECT_NEAR(r.fit.amplitude, 0.38, 0.0038);
  EXPECT_NEAR(r.fit.decay_ns, 1434.0, 14.34);
  EXPECT_EQ(r.fit.tau0_ns, 67.0);
  EXPECT_LT(r.residual_norm, 1e-6);  // the minimum locates T only to about sqrt(eps)
}

TEST(FitExponential, TauZeroConvention) {
  // Dropping the first sample moves tau0 to the next delay and rescales A.
  auto s = reference_curve(0.0, 0);
  s.erase(s.begin());
  auto r = fit_exponential(s);
  EXPECT_EQ(r.fit.tau0_ns, s.front().first);
  EXPECT_NEAR(r.fit.amplitude, 0.38 * std::exp(-(s.front().first - 67.0) / 1434.0), 1e-6);
  EXPECT_NEAR(r.fit.rebased(67.0).amplitude, 0.38, 1e-6);
}

TEST(FitExponential, ConstantSamples) {
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k < 8; ++k) s.emplace_back(100.0 * k, 0.2);
  auto r = fit_exponential(s);
  EXPECT_NEAR(r.fit.amplitude, 0.0, 1e-9);
  EXPECT_NEAR(r.fit.g0, 0.2, 1e-9);
}

TEST(FitExponential, NoisyStudyMedianWithinTenPercent) {
  std::vector<double> eg, ea, et;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto r = fit_exponential(reference_curve(0.05, seed));
    eg.push_back(std::abs(r.fit.g0 / -0.08 - 1.0));
    ea.push_back(std::abs(r.fit.amplitude / 0.38 - 1.0));
    et.push_back(std::abs(r.fit.decay_ns / 1434.0 - 1.0));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_LT(median(ea), 0.10);
  EXPECT_LT(median(et), 0.10);
  EXPECT_LT(median(eg), 0.10);
}

TEST(FitExponential, NeedsFourDistinctDelays) {
  std::vector<std::pair<double, double>> s{{0, 1}, {1, 0.9}, {2, 0.8}, {2, 0.8}};
  EXPECT_THROW(fit_exponential(s), InvalidArgument);
}

TEST(MonteCarlo, ShrinksWithScale) {
  auto truth = werner_state(0.85, bell_state(BellKind::phi_plus));
  auto estimator = [](std::span<const double> d) { return tomo_linear(CountTable16::from_flat(d)).fidelity_to_ideal; };
  auto big = expected_counts(truth, 1e7).flat();
  EXPECT_LT(montecarlo_std(big, estimator, 100, 1), 0.003);
}

TEST(MonteCarlo, PoissonScalingLaw) {
  auto truth = werner_state(0.85, bell_state(BellKind::phi_plus));
  auto estimator = [](std::span<const double> d) { return chsh_S(chsh_from_flat(standard_chsh_angles(), d)); };
  auto one = expected_rates(truth, chsh_settings(standard_chsh_angles()), 2000.0);
  auto two = expected_rates(truth, chsh_settings(standard_chsh_angles()), 4000.0);
  const double s1 = montecarlo_std(one, estimator, 2000, 3);
  const double s2 = montecarlo_std(two, estimator, 2000, 3);
  EXPECT_NEAR(s2 / s1, 1.0 / std::numbers::sqrt2, 0.05);
}

TEST(MonteCarlo, DeterministicAndValidated) {
  std::vector<double> d{100, 200, 300};
  auto sum = [](std::span<const double> v) { return v[0] / (v[1] + v[2]); };
  EXPECT_EQ(montecarlo_std(d, sum, 150, 9), montecarlo_std(d, sum, 150, 9));
  EXPECT_NE(montecarlo_std(d, sum, 150, 9), montecarlo_std(d, sum, 150, 10));
  EXPECT_THROW(montecarlo_std(d, sum, 99, 9), InvalidArgument);
}

TEST(MonteCarlo, FidelityErrorAtLowCounts) {
  // A few hundred coincidences on the strong settings gives percent-level errors.
  auto truth = werner_state(0.88, bell_state(BellKind::phi_plus));
  auto mean = expected_counts(truth, 1000.0).flat();
  auto estimator = [](std::span<const double> d) { return tomo_mle(CountTable16::from_flat(d)).fidelity_to_ideal; };
  const double s = montecarlo_std(mean, estimator, 100, 4);
  EXPECT_GT(s, 0.005);
  EXPECT_LT(s, 0.05);
}

}  // namespace
}  // namespace oamstore::analysis
