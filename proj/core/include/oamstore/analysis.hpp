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

#ifndef OAMSTORE_ANALYSIS_HPP
#define OAMSTORE_ANALYSIS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oamstore/counts.hpp"
#include "oamstore/hilbert.hpp"
#include "oamstore/memory.hpp"
#include "oamstore/optics.hpp"

namespace oamstore::analysis {

using counts::Estimate;

/// Coincidences for the 16 tomography settings. counts[i][j] has state i of
/// the tomography basis on signal 2 and state j on signal 1.
struct CountTable16 {
  std::array<std::array<double, 4>, 4> counts{};
  double integration_time_s = 0.0;

  void validate() const;
  std::vector<double> flat() const;
  static CountTable16 from_flat(std::span<const double> values, double integration_time_s = 0.0);
};

/// Born-rule rates scale * Tr(rho P) for each setting.
std::vector<double> expected_rates(const DensityMatrix& rho, const std::vector<optics::MeasurementSetting>& settings,
                                   double scale);
CountTable16 expected_counts(const DensityMatrix& rho, double scale);

/// raw - background per entry, clamped at zero.
std::vector<double> subtract_background(std::span<const double> raw, std::span<const double> background);
CountTable16 subtract_background(const CountTable16& raw, const CountTable16& background);

enum class TomographyMethod { linear, mle };

struct TomographyResult {
  TomographyResult(DensityMatrix estimate, TomographyMethod how)
      : rho(std::move(estimate)), raw(rho.matrix()), method(how) {}

  /// Physical estimate: the repaired inversion for linear, the optimum for mle.
  DensityMatrix rho;
  /// Linear inversion before repair; equals rho for mle.
  CMatrix raw;
  TomographyMethod method = TomographyMethod::linear;
  /// Poisson log-likelihood up to a count-only constant; NaN for linear.
  double log_likelihood = 0.0;
  double fidelity_to_ideal = 0.0;
  /// Filled by Monte Carlo when requested; NaN otherwise.
  double fidelity_std = 0.0;
  bool converged = true;
  int iterations = 0;
  /// Per-iteration log-likelihood of the accepted iterates when requested.
  std::vector<double> log_likelihood_trace;
};

/// Linear inversion over the 16 product projectors. Normalisation comes from
/// the {L,R} x {L,R} block, whose projectors sum to the identity.
TomographyResult tomo_linear(const CountTable16& table, const DensityMatrix& ideal = DensityMatrix::pure(bell_state(BellKind::phi_plus)));

struct MleOptions {
  std::optional<DensityMatrix> initial;
  double gradient_tolerance = 1e-8;
  int max_iterations = 10000;
  bool record_trace = false;
};

/// Maximum-likelihood state over rho = T^dagger T / Tr with lower-triangular T,
/// BFGS with an Armijo line search on the profile Poisson likelihood.
TomographyResult tomo_mle(const CountTable16& table, const MleOptions& options = {},
                          const DensityMatrix& ideal = DensityMatrix::pure(bell_state(BellKind::phi_plus)));

TomographyResult reconstruct(const CountTable16& table, TomographyMethod method,
                             const DensityMatrix& ideal = DensityMatrix::pure(bell_state(BellKind::phi_plus)));

/// Profile Poisson log-likelihood sum n log p - N log sum p, with p floored at
/// 1e-12.
double profile_log_likelihood(const CountTable16& table, const DensityMatrix& rho);

/// Gradient of profile_log_likelihood with respect to the 16 Cholesky
/// parameters, and the parameter packing used by tomo_mle.
std::vector<double> cholesky_parameters(const DensityMatrix& rho);
DensityMatrix density_from_parameters(std::span<const double> t);
std::vector<double> likelihood_gradient(const CountTable16& table, std::span<const double> t);
double likelihood_at(const CountTable16& table, std::span<const double> t);

struct ChshAngles {
  double a = 0.0;
  double a_prime = 0.0;
  double b = 0.0;
  double b_prime = 0.0;
};

/// a = 0, b = pi/8, a' = pi/4, b' = 3pi/8.
ChshAngles standard_chsh_angles();

/// counts[i][j]: signal 2 at angle i of {a, a+pi/2, a', a'+pi/2}, signal 1 at
/// angle j of {b, b+pi/2, b', b'+pi/2}.
struct ChshCounts {
  ChshAngles angles;
  std::array<std::array<double, 4>, 4> counts{};

  void validate() const;
  std::vector<double> flat() const;
  static std::array<double, 4> signal2_angles(const ChshAngles& a);
  static std::array<double, 4> signal1_angles(const ChshAngles& a);
};

/// Settings in ChshCounts order (row-major).
std::vector<optics::MeasurementSetting> chsh_settings(const ChshAngles& angles,
                                                      optics::Conjugation conj_signal2 = optics::Conjugation::identity,
                                                      optics::Conjugation conj_signal1 = optics::Conjugation::conjugate);

/// [C(a,b) + C(a+,b+) - C(a+,b) - C(a,b+)] / sum, where x+ = x + pi/2.
double chsh_E(double c_ab, double c_aperp_bperp, double c_aperp_b, double c_a_bperp);
double chsh_S(double e_ab, double e_abp, double e_apb, double e_apbp);
double chsh_S(const ChshCounts& counts);
ChshCounts chsh_from_flat(const ChshAngles& angles, std::span<const double> values);

struct VisibilityFit {
  double visibility = 0.0;
  double std_error = 0.0;
  double phase_rad = 0.0;
  double offset = 0.0;
};

/// Least squares for offset * [1 + V cos(2(theta_b - phase))] over
/// (theta_b, rate) samples.
VisibilityFit visibility_fit(std::span<const std::pair<double, double>> samples);

struct ExponentialFit {
  memory::EfficiencyFit fit;
  double residual_norm = 0.0;
};

/// Least squares for g0 + A exp(-(tau - tau0)/T) with tau0 fixed at the
/// earliest sample and A >= 0. (g0, A) are solved exactly for each T and T is
/// found by a bracketed one-dimensional search.
ExponentialFit fit_exponential(std::span<const std::pair<double, double>> samples);

using Estimator = std::function<double(std::span<const double>)>;

/// Sample standard deviation of estimator over Poisson resamples of counts.
/// Resample r draws from substream r of seed, so the result is independent of
/// the number of worker threads.
double montecarlo_std(std::span<const double> counts, const Estimator& estimator, int n_resamples, std::uint64_t seed);

}  // namespace oamstore::analysis

#endif
