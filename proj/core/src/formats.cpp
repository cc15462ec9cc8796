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

#include "oamstore/formats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "oamstore/error.hpp"
#include "oamstore/text.hpp"

namespace oamstore::formats {

namespace {

using text::format_double;

struct Csv {
  std::map<std::string, std::string> meta;
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Splits "#key=value" metadata from rows and checks the column header.
Csv read_csv(std::string_view content, std::string_view header, std::size_t columns) {
  Csv csv;
  bool seen_header = false;
  std::size_t line_no = 0;
  for (auto line : text::lines(content)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw InvalidArgument("line " + std::to_string(line_no) + ": metadata needs #key=value");
      }
      csv.meta[std::string(line.substr(1, eq - 1))] = std::string(line.substr(eq + 1));
      continue;
    }
    if (!seen_header) {
      if (line != header) {
        throw InvalidArgument("line " + std::to_string(line_no) + ": expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    auto fields = text::split(line, ',');
    if (fields.size() != columns) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                            " fields, found " + std::to_string(fields.size()));
    }
    csv.rows.push_back(fields);
    csv.line_numbers.push_back(line_no);
  }
  if (!seen_header) throw InvalidArgument("missing header '" + std::string(header) + "'");
  return csv;
}

double parse_count(std::string_view field, std::size_t line_no) {
  double v = text::parse_double(field, "count");
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidArgument("line " + std::to_string(line_no) + ": count must be finite and >= 0");
  }
  return v;
}

std::size_t state_index(std::string_view name, std::size_t line_no) {
  const auto& names = optics::tomography_state_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw InvalidArgument("line " + std::to_string(line_no) + ": unknown basis state '" + std::string(name) + "'");
}

bool same_angle(double x, double y) { return std::abs(x - y) <= 1e-9; }

}  // namespace

std::string to_csv(const analysis::CountTable16& table) {
  const auto& names = optics::tomography_state_names();
  std::string out = "#integration_time_s=" + format_double(table.integration_time_s) + "\n";
  out += "state_a,state_b,count\n";
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      out += std::string(names[i]) + "," + std::string(names[j]) + "," + format_double(table.counts[i][j]) + "\n";
    }
  }
  return out;
}

analysis::CountTable16 count_table_from_csv(std::string_view content) {
  Csv csv = read_csv(content, "state_a,state_b,count", 3);
  analysis::CountTable16 table;
  if (auto it = csv.meta.find("integration_time_s"); it != csv.meta.end()) {
    table.integration_time_s = text::parse_double(it->second, "integration_time_s");
  }
  std::array<std::array<bool, 4>, 4> seen{};
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    std::size_t i = state_index(f[0], csv.line_numbers[r]);
    std::size_t j = state_index(f[1], csv.line_numbers[r]);
    if (seen[i][j]) throw InvalidArgument("line " + std::to_string(csv.line_numbers[r]) + ": duplicate setting");
    seen[i][j] = true;
    table.counts[i][j] = parse_count(f[2], csv.line_numbers[r]);
  }
  if (csv.rows.size() != 16) throw InvalidArgument("tomography table needs 16 rows, found " + std::to_string(csv.rows.size()));
  table.validate();
  return table;
}

std::string to_csv(const analysis::ChshCounts& counts) {
  const auto& g = counts.angles;
  std::string out = "#angles_rad=" + format_double(g.a) + "," + format_double(g.a_prime) + "," + format_double(g.b) +
                    "," + format_double(g.b_prime) + "\n";
  out += "theta_a_rad,theta_b_rad,count\n";
  auto sa = analysis::ChshCounts::signal2_angles(g);
  auto sb = analysis::ChshCounts::signal1_angles(g);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      out += format_double(sa[i]) + "," + format_double(sb[j]) + "," + format_double(counts.counts[i][j]) + "\n";
    }
  }
  return out;
}

analysis::ChshCounts chsh_counts_from_csv(std::string_view content) {
  Csv csv = read_csv(content, "theta_a_rad,theta_b_rad,count", 3);
  auto it = csv.meta.find("angles_rad");
  if (it == csv.meta.end()) throw InvalidArgument("CHSH CSV lacks #angles_rad=a,a',b,b'");
  auto parts = text::split(it->second, ',');
  if (parts.size() != 4) throw InvalidArgument("#angles_rad needs four angles");
  analysis::ChshCounts c;
  c.angles = {text::parse_double(parts[0], "a"), text::parse_double(parts[1], "a'"), text::parse_double(parts[2], "b"),
              text::parse_double(parts[3], "b'")};
  auto sa = analysis::ChshCounts::signal2_angles(c.angles);
  auto sb = analysis::ChshCounts::signal1_angles(c.angles);
  std::array<std::array<bool, 4>, 4> seen{};
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    const auto ln = csv.line_numbers[r];
    double ta = text::parse_double(f[0], "theta_a_rad");
    double tb = text::parse_double(f[1], "theta_b_rad");
    auto ia = std::find_if(sa.begin(), sa.end(), [&](double x) { return same_angle(x, ta); });
    auto ib = std::find_if(sb.begin(), sb.end(), [&](double x) { return same_angle(x, tb); });
    if (ia == sa.end() || ib == sb.end()) {
      throw InvalidArgument("line " + std::to_string(ln) + ": angles are not in the CHSH set");
    }
    auto i = static_cast<std::size_t>(ia - sa.begin());
    auto j = static_cast<std::size_t>(ib - sb.begin());
    if (seen[i][j]) throw InvalidArgument("line " + std::to_string(ln) + ": duplicate angle pair");
    seen[i][j] = true;
    c.counts[i][j] = parse_count(f[2], ln);
  }
  if (csv.rows.size() != 16) throw InvalidArgument("CHSH table needs 16 rows, found " + std::to_string(csv.rows.size()));
  c.validate();
  return c;
}

std::vector<double> VisibilityScan::theta_a_values() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (std::none_of(out.begin(), out.end(), [&](double x) { return same_angle(x, r.theta_a_rad); })) {
      out.push_back(r.theta_a_rad);
    }
  }
  return out;
}

std::vector<std::pair<double, double>> VisibilityScan::samples_at(double theta_a_rad) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows) {
    if (same_angle(r.theta_a_rad, theta_a_rad)) out.emplace_back(r.theta_b_rad, r.count);
  }
  return out;
}

std::vector<double> VisibilityScan::counts() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.count);
  return out;
}

VisibilityScan VisibilityScan::with_counts(std::span<const double> values) const {
  if (values.size() != rows.size()) throw InvalidArgument("visibility counts do not match the scan");
  VisibilityScan out = *this;
  for (std::size_t i = 0; i < rows.size(); ++i) out.rows[i].count = values[i];
  return out;
}

std::string to_csv(const VisibilityScan& scan) {
  std::string out = "theta_a_rad,theta_b_rad,count\n";
  for (const auto& r : scan.rows) {
    out += format_double(r.theta_a_rad) + "," + format_double(r.theta_b_rad) + "," + format_double(r.count) + "\n";
  }
  return out;
}

VisibilityScan visibility_scan_from_csv(std::string_view content) {
  Csv csv = read_csv(content, "theta_a_rad,theta_b_rad,count", 3);
  VisibilityScan scan;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    scan.rows.push_back({text::parse_double(f[0], "theta_a_rad"), text::parse_double(f[1], "theta_b_rad"),
                         parse_count(f[2], csv.line_numbers[r])});
  }
  return scan;
}

std::string efficiency_samples_to_csv(const std::vector<std::pair<double, double>>& samples) {
  std::string out = "tau_ns,efficiency\n";
  for (const auto& [tau, eff] : samples) out += format_double(tau) + "," + format_double(eff) + "\n";
  return out;
}

std::vector<std::pair<double, double>> efficiency_samples_from_csv(std::string_view content) {
  Csv csv = read_csv(content, "tau_ns,efficiency", 2);
  std::vector<std::pair<double, double>> out;
  for (const auto& f : csv.rows) {
    out.emplace_back(text::parse_double(f[0], "tau_ns"), text::parse_double(f[1], "efficiency"));
  }
  return out;
}

std::string to_text(const analysis::TomographyResult& result) {
  std::string out = oamstore::to_text(result.rho);
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += std::string("#method=") + (result.method == analysis::TomographyMethod::mle ? "mle" : "linear") + "\n";
  out += "#converged=" + std::string(result.converged ? "1" : "0") + "\n";
  out += "#iterations=" + text::format_int(result.iterations) + "\n";
  out += "fidelity,std,loglik\n";
  out += format_double(result.fidelity_to_ideal) + "," + format_double(result.fidelity_std) + "," +
         format_double(result.log_likelihood) + "\n";
  return out;
}

analysis::TomographyResult tomography_result_from_text(std::string_view content) {
  std::string matrix_text;
  std::map<std::string, std::string> meta;
  std::vector<std::string_view> tail;
  bool in_tail = false;
  for (auto line : text::lines(content)) {
    auto t = text::trim(line);
    if (t == "fidelity,std,loglik") {
      in_tail = true;
      continue;
    }
    if (in_tail) {
      if (!t.empty()) tail.push_back(t);
      continue;
    }
    if (t.starts_with("#") && !t.starts_with("#basis=")) {
      auto eq = t.find('=');
      if (eq == std::string_view::npos) throw InvalidArgument("tomography result metadata needs #key=value");
      meta[std::string(t.substr(1, eq - 1))] = std::string(t.substr(eq + 1));
      continue;
    }
    matrix_text += std::string(line) + "\n";
  }
  if (!in_tail || tail.size() != 1) throw InvalidArgument("tomography result needs one 'fidelity,std,loglik' row");
  auto f = text::split(tail.front(), ',');
  if (f.size() != 3) throw InvalidArgument("summary row needs fidelity,std,loglik");
  DensityMatrix rho = density_matrix_from_text(matrix_text);
  analysis::TomographyResult r(rho, analysis::TomographyMethod::mle);
  const std::string method = meta.count("method") ? meta["method"] : "mle";
  if (method == "linear") {
    r.method = analysis::TomographyMethod::linear;
  } else if (method != "mle") {
    throw InvalidArgument("unknown tomography method '" + method + "'");
  }
  if (meta.count("converged")) r.converged = meta["converged"] == "1";
  if (meta.count("iterations")) r.iterations = static_cast<int>(text::parse_int(meta["iterations"], "iterations"));
  r.fidelity_to_ideal = text::parse_double(f[0], "fidelity");
  r.fidelity_std = text::parse_double(f[1], "std");
  r.log_likelihood = text::parse_double(f[2], "loglik");
  return r;
}

}  // namespace oamstore::formats
