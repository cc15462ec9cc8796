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

#ifndef OAMSTORE_FORMATS_HPP
#define OAMSTORE_FORMATS_HPP

// CSV and text formats for analysis inputs and outputs. Numbers are written in
// shortest round-trip form, so every writer/reader pair here is lossless.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oamstore/analysis.hpp"

namespace oamstore::formats {

/// "#integration_time_s=..." then "state_a,state_b,count" and 16 rows named by
/// the tomography basis (L, R, L+R, L-iR).
std::string to_csv(const analysis::CountTable16& table);
analysis::CountTable16 count_table_from_csv(std::string_view content);

/// "#angles_rad=a,a',b,b'" then "theta_a_rad,theta_b_rad,count" and 16 rows.
std::string to_csv(const analysis::ChshCounts& counts);
analysis::ChshCounts chsh_counts_from_csv(std::string_view content);

struct VisibilityRow {
  double theta_a_rad = 0.0;
  double theta_b_rad = 0.0;
  double count = 0.0;
};

/// Coincidences for sector-mask scans; signal 2 at theta_a, signal 1 at theta_b.
struct VisibilityScan {
  std::vector<VisibilityRow> rows;

  std::vector<double> theta_a_values() const;
  std::vector<std::pair<double, double>> samples_at(double theta_a_rad) const;
  std::vector<double> counts() const;
  VisibilityScan with_counts(std::span<const double> values) const;
};

/// "theta_a_rad,theta_b_rad,count" rows.
std::string to_csv(const VisibilityScan& scan);
VisibilityScan visibility_scan_from_csv(std::string_view content);

/// "tau_ns,efficiency" rows.
std::string efficiency_samples_to_csv(const std::vector<std::pair<double, double>>& samples);
std::vector<std::pair<double, double>> efficiency_samples_from_csv(std::string_view content);

/// Density matrix text, "#method=", "#converged=" and "#iterations=" lines, then
/// "fidelity,std,loglik" and one value row.
std::string to_text(const analysis::TomographyResult& result);
analysis::TomographyResult tomography_result_from_text(std::string_view content);

}  // namespace oamstore::formats

#endif
