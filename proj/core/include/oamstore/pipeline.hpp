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

#ifndef OAMSTORE_PIPELINE_HPP
#define OAMSTORE_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oamstore/analysis.hpp"
#include "oamstore/counts.hpp"
#include "oamstore/formats.hpp"
#include "oamstore/memory.hpp"
#include "oamstore/optics.hpp"
#include "oamstore/source.hpp"

namespace oamstore::pipeline {

struct ArmOptics {
  optics::OpticalPath path;
  optics::ModeImperfection imperfection;
  /// Orientation convention of this arm's sector masks.
  optics::Conjugation sector_conjugation = optics::Conjugation::identity;
};

struct OpticsConfig {
  /// Signal 2: one mirror to its SLM. Signal 1: five mirrors and a 4-f relay.
  ArmOptics signal2{{1, false}, {0.045, 0.40}, optics::Conjugation::identity};
  ArmOptics signal1{{5, true}, {0.0, 0.0}, optics::Conjugation::conjugate};
  int postselect_l = 1;
};

struct StorageConfig {
  bool enabled = true;
  double storage_time_ns = 150.0;
  /// Pump 1 to pump 2 delay of the storage sequence; recorded, not simulated.
  double pump_delay_ns = 260.0;
  memory::EfficiencyFit fit;
  memory::MemoryNoise noise = memory::calibrated_noise();
};

struct MeasurementPlan {
  bool tomo16 = true;
  bool chsh = true;
  bool visibility = true;
  bool hbt = false;
  bool correlate = false;
  /// With storage enabled, also write tomography and CHSH tables for the same
  /// source with the memory bypassed.
  bool include_pre_storage = true;
  double windows_per_setting = 1e8;
  analysis::ChshAngles chsh_angles = analysis::standard_chsh_angles();
  std::vector<double> visibility_theta_a_rad;
  std::vector<double> visibility_theta_b_rad;
  bool background_subtraction = true;
  std::int64_t hist_span_ns = 2500;
  double peak_window_ns = 200.0;
  counts::DetectorModel detector;
  /// Mode content of event-level runs, where the SLMs act as mirrors.
  source::SchmidtSpectrum event_spectrum = source::SchmidtSpectrum::uniform({0});

  MeasurementPlan();
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "oamstore-run";
  source::SourceConfig source;
  source::SchmidtSpectrum spectrum = source::SchmidtSpectrum::uniform({1, -1});
  StorageConfig memory;
  OpticsConfig optics;
  MeasurementPlan measurement;

  void validate() const;
};

/// Parses the JSON configuration. Missing keys keep their defaults; unknown
/// keys and bad values raise InvalidArgument naming the field path.
RunConfig parse_run_config(std::string_view json_text);
std::string to_json(const RunConfig& config);

struct PreparedState {
  DensityMatrix rho;
  /// Retrieval efficiency of the stored photon (1 without storage).
  double retrieval_probability = 1.0;
};

/// Source state after post-selection, arm imperfections and, when enabled,
/// the memory channel on signal 1. Labels are those seen at the SLMs.
PreparedState prepared_state(const RunConfig& config, bool with_storage);

/// Mean coincidences per setting for W windows, to first order in accidental
/// and multi-pair contributions. The background run is the same acquisition
/// with no signal 1 pair photons.
struct CountModel {
  double windows = 0.0;
  double pair_rate = 0.0;
  double pair_second_moment = 0.0;
  double transmission_signal1 = 0.0;
  double transmission_signal2 = 0.0;
  double accidental_signal1 = 0.0;
  double accidental_signal2 = 0.0;

  double signal(double p_ab, double p_a, double p_b) const;
  double background(double p_a) const;
};

CountModel count_model(const RunConfig& config, double retrieval_probability);

/// Poisson-sampled raw and background counts for a list of settings.
/// Setting k draws from substream (first_index + k).
std::pair<std::vector<double>, std::vector<double>> sample_settings(
    const DensityMatrix& rho, const std::vector<optics::MeasurementSetting>& settings, const CountModel& model,
    std::uint64_t seed, std::uint64_t first_index);

struct SimulationProducts {
  explicit SimulationProducts(PreparedState post_storage) : post(std::move(post_storage)) {}

  PreparedState post;
  std::optional<PreparedState> pre;
  std::optional<analysis::CountTable16> tomo, tomo_background;
  std::optional<analysis::CountTable16> tomo_pre, tomo_pre_background;
  std::optional<analysis::ChshCounts> chsh, chsh_background;
  std::optional<analysis::ChshCounts> chsh_pre, chsh_pre_background;
  std::optional<formats::VisibilityScan> visibility, visibility_background;
  std::optional<counts::TimestampStream> hbt, correlate;
};

SimulationProducts simulate(const RunConfig& config);

/// Sector-mask settings for a visibility scan, in VisibilityScan row order.
std::vector<optics::MeasurementSetting> visibility_settings(const RunConfig& config, formats::VisibilityScan* rows);

/// Writes every product plus manifest.json into dir (created if needed) and
/// returns the file names written.
std::vector<std::string> write_products(const RunConfig& config, const SimulationProducts& products,
                                        const std::string& dir);

// Analysis entry points shared by the command-line tool and the report.

struct TomographyOptions {
  analysis::TomographyMethod method = analysis::TomographyMethod::mle;
  bool background_subtraction = true;
  int resamples = 200;
  std::uint64_t seed = 1;
};

analysis::TomographyResult analyze_tomography(const analysis::CountTable16& raw,
                                              const analysis::CountTable16* background,
                                              const TomographyOptions& options);

/// Fidelity between two reconstructions, rho_output inside the outer roots,
/// with a Monte Carlo error from resampling both tables.
counts::Estimate state_fidelity(const analysis::CountTable16& output_raw, const analysis::CountTable16* output_background,
                                const analysis::CountTable16& input_raw, const analysis::CountTable16* input_background,
                                const TomographyOptions& options);

counts::Estimate analyze_chsh(const analysis::ChshCounts& raw, const analysis::ChshCounts* background,
                              bool background_subtraction, int resamples, std::uint64_t seed);

struct VisibilityResult {
  double theta_a_rad = 0.0;
  analysis::VisibilityFit fit;
  /// Monte Carlo standard error, NaN when resampling is off.
  double montecarlo_std = 0.0;
};

std::vector<VisibilityResult> analyze_visibility(const formats::VisibilityScan& raw,
                                                 const formats::VisibilityScan* background,
                                                 bool background_subtraction, int resamples, std::uint64_t seed);

struct CorrelationOptions {
  /// The cross histogram sums every (trigger, stop) channel combination.
  std::vector<int> triggers{0};
  std::vector<int> stops{1};
  std::int64_t span_ns = 2500;
  double peak_window_ns = 200.0;
  std::optional<std::int64_t> peak_center_ns;
  /// Channel pairs carrying split copies of signal 1 and signal 2.
  std::optional<std::pair<int, int>> auto_signal1;
  std::optional<std::pair<int, int>> auto_signal2;
};

struct CorrelationResult {
  counts::CoincidenceHistogram cross;
  counts::Estimate g12;
  std::optional<counts::Estimate> g11, g22, R;
};

CorrelationResult analyze_correlation(const counts::TimestampStream& stream, const CorrelationOptions& options);

struct HbtResult {
  counts::HbtCounts counts;
  counts::Estimate alpha;
};

HbtResult analyze_hbt(const counts::TimestampStream& stream, int herald = 1, int split_a = 2, int split_b = 3);

}  // namespace oamstore::pipeline

#endif
