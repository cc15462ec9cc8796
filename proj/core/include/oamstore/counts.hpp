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

#ifndef OAMSTORE_COUNTS_HPP
#define OAMSTORE_COUNTS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oamstore/source.hpp"

namespace oamstore::counts {

/// Detector channels are small integer TDC inputs.
inline constexpr int kMaxChannel = 15;

struct TimestampRecord {
  int channel = 0;
  std::int64_t time_ns = 0;
  friend auto operator<=>(const TimestampRecord&, const TimestampRecord&) = default;
};

struct TimestampStream {
  std::int64_t bin_width_ns = 1;
  std::int64_t pulse_period_ns = 1000;
  std::int64_t window_count = 0;
  /// Sorted by time.
  std::vector<TimestampRecord> records;

  void validate() const;
  std::int64_t count(int channel) const;
};

std::string to_text(const TimestampStream& stream);
TimestampStream timestamp_stream_from_text(std::string_view content);

/// Detector channels fed by each arm. A photon on an arm with several channels
/// picks one uniformly (balanced beam splitters); an empty list discards it.
struct ChannelMap {
  std::vector<int> signal1{0};
  std::vector<int> signal2{1};

  /// Signal 1 split over {0, 2}, signal 2 over {1, 3}.
  static ChannelMap correlation();
  /// Herald (signal 2) on 1, signal 1 split over {2, 3}.
  static ChannelMap hbt();
};

struct DetectorModel {
  /// Gaussian timing jitter, standard deviation.
  double jitter_ns = 0.0;
  /// Non-paralysable dead time per channel. Zero registers every photon,
  /// including several in the same time bin.
  double dead_time_ns = 0.0;
  std::int64_t bin_width_ns = 1;

  void validate() const;
};

/// Turns emissions into click records. Signal 1 photons arrive at the start of
/// their window and signal 2 photons pair_delay_ns later; accidental clicks
/// arrive at their arm's nominal time and bypass the transmission.
TimestampStream detect(const source::EmissionRecord& emissions, double transmission_signal1,
                       double transmission_signal2, const ChannelMap& channels, const DetectorModel& detector,
                       std::uint64_t seed);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Counts of stop clicks at delay (t_stop - t_trigger), one bin per bin width
/// from -span_ns to +span_ns.
struct CoincidenceHistogram {
  int trigger = 0;
  int stop = 1;
  std::int64_t bin_width_ns = 1;
  std::int64_t span_ns = 0;
  std::int64_t pulse_period_ns = 0;
  std::vector<std::uint64_t> counts;

  std::int64_t delay_ns(std::size_t bin) const;
  std::uint64_t total() const;
};

CoincidenceHistogram histogram(const TimestampStream& stream, int trigger, int stop, std::int64_t span_ns);

/// Bin-wise sum of histograms on the same delay grid; keeps the first one's
/// channel ids.
CoincidenceHistogram combine(std::span<const CoincidenceHistogram> parts);

/// "delay_ns,count" rows after "#key=value" metadata lines.
std::string to_csv(const CoincidenceHistogram& h);
CoincidenceHistogram histogram_from_csv(std::string_view content);

/// Cross-correlation from the ratio of the peak at `first_peak_center_ns`
/// (default: the tallest bin) to the mean of the neighbouring comb peaks one
/// pulse period away that fit inside the histogram. Peaks integrate bins within
/// peak_window_ns / 2 of their centre.
Estimate g12_comb_normalized(const CoincidenceHistogram& h, double peak_window_ns = 200.0,
                             std::optional<std::int64_t> first_peak_center_ns = std::nullopt);

/// R = g12^2 / (g11 g22).
double cauchy_schwarz_R(double g12, double g11, double g22);
Estimate cauchy_schwarz_R(const Estimate& g12, const Estimate& g11, const Estimate& g22);

/// Window-level coincidence counts for a heralded Hanbury Brown-Twiss test.
/// A window counts once toward each term however many clicks it holds.
struct HbtCounts {
  std::uint64_t p1 = 0;
  std::uint64_t p12 = 0;
  std::uint64_t p13 = 0;
  std::uint64_t p123 = 0;
};

HbtCounts hbt_counts(const TimestampStream& stream, int herald = 1, int split_a = 2, int split_b = 3);

/// alpha = P1 P123 / (P12 P13), first-order Poisson error. A zero P123 gives
/// alpha = 0 with the error of a single count.
Estimate alpha(const HbtCounts& counts);

}  // namespace oamstore::counts

#endif
