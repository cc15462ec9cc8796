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

#ifndef OAMSTORE_SOURCE_HPP
#define OAMSTORE_SOURCE_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "oamstore/hilbert.hpp"
#include "oamstore/optics.hpp"

namespace oamstore::source {

/// Amplitudes c_l of the Raman pair state sum_l c_l |l>_s1 |-l>.
class SchmidtSpectrum {
 public:
  explicit SchmidtSpectrum(std::map<OamLabel, Complex> coefficients);

  /// Equal weights over the given labels.
  static SchmidtSpectrum uniform(const std::vector<int>& labels);

  const std::map<OamLabel, Complex>& coefficients() const { return coefficients_; }
  double probability(OamLabel label) const;

 private:
  std::map<OamLabel, Complex> coefficients_;
};

enum class PairStatistics {
  /// Independent multimode-thermal pair number per OAM label, auto-correlation
  /// thermal_auto_g2 (1 gives Poissonian pair number).
  thermal,
  /// At most one pair per window.
  heralded_single,
  /// Exactly fixed_pair_count pairs in a window, with probability pair_rate.
  fixed,
};

struct SourceConfig {
  /// Mean pairs per window (probability of an emitting window for
  /// heralded_single and fixed).
  double pair_rate = 0.002;
  double thermal_auto_g2 = 2.0;
  PairStatistics statistics = PairStatistics::thermal;
  int fixed_pair_count = 2;
  /// Mean uncorrelated noise clicks per window at each detector arm.
  double accidental_rate_signal1 = 5e-4;
  double accidental_rate_signal2 = 5e-4;
  /// Whole-arm transmissions: filters, fibre coupling, detector efficiency.
  double transmission_signal1 = 0.30 * 0.50 * 0.60;
  double transmission_signal2 = 0.80 * 0.60 * 0.95 * 0.60;
  std::int64_t pulse_period_ns = 1000;
  std::int64_t window_count = 1'000'000;
  /// Signal 2 follows signal 1 by this delay within a window.
  std::int64_t pair_delay_ns = 380;

  void validate() const;
};

/// The SRS pair state in the (signal 2) x (signal 1) product basis, with both
/// arms labelled by every +-l in the spectrum (descending).
Ket srs_state(const SchmidtSpectrum& spectrum);

/// Projects both arms on span{|+l>, |-l>}, renormalises, relabels +l -> L and
/// -l -> R and swaps L/R on every arm whose path conjugates.
DensityMatrix postselect_2d(const Ket& state, int l, const optics::OpticalPath& signal2_path,
                            const optics::OpticalPath& signal1_path);
DensityMatrix postselect_2d(const DensityMatrix& state, int l,
                            const optics::OpticalPath& signal2_path,
                            const optics::OpticalPath& signal1_path);

struct PairEvent {
  OamLabel signal1;
  OamLabel signal2;
};

/// Everything emitted in one non-empty window.
struct WindowEmission {
  std::int64_t window = 0;
  std::vector<PairEvent> pairs;
  int accidentals_signal1 = 0;
  int accidentals_signal2 = 0;
};

struct EmissionRecord {
  std::int64_t window_count = 0;
  std::int64_t pulse_period_ns = 0;
  std::int64_t pair_delay_ns = 0;
  /// Non-empty windows only, ascending.
  std::vector<WindowEmission> windows;

  std::int64_t total_pairs() const;
};

/// Event-level emission. Each window draws from its own substream of `seed`,
/// so the result does not depend on how windows are split across threads.
EmissionRecord sample_emissions(const SourceConfig& config, const SchmidtSpectrum& spectrum,
                                std::uint64_t seed);

/// E[n(n-1)] of the per-window pair number, summed over modes.
double pair_second_factorial_moment(const SourceConfig& config, const SchmidtSpectrum& spectrum);

}  // namespace oamstore::source

#endif
