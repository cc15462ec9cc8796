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

#include "oamstore/source.hpp"

#include <cmath>
#include <random>
#include <set>

#include "oamstore/error.hpp"
#include "oamstore/random.hpp"
#include "parallel.hpp"

namespace oamstore::source {

SchmidtSpectrum::SchmidtSpectrum(std::map<OamLabel, Complex> coefficients)
    : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) throw InvalidArgument("Schmidt spectrum is empty");
  double norm = 0.0;
  for (const auto& [label, c] : coefficients_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw InvalidArgument("Schmidt coefficient for l=" + std::to_string(label.l) + " is not finite");
    }
    norm += std::norm(c);
  }
  if (std::abs(norm - 1.0) > kKetNormTolerance) {
    throw InvalidArgument("Schmidt spectrum is not normalised: sum |c_l|^2 = " + std::to_string(norm));
  }
}

SchmidtSpectrum SchmidtSpectrum::uniform(const std::vector<int>& labels) {
  std::set<int> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size() || labels.empty()) {
    throw InvalidArgument("uniform spectrum needs distinct labels");
  }
  std::map<OamLabel, Complex> c;
  double amp = 1.0 / std::sqrt(static_cast<double>(labels.size()));
  for (int l : labels) c[OamLabel{l}] = amp;
  return SchmidtSpectrum(std::move(c));
}

double SchmidtSpectrum::probability(OamLabel label) const {
  auto it = coefficients_.find(label);
  return it == coefficients_.end() ? 0.0 : std::norm(it->second);
}

void SourceConfig::validate() const {
  auto finite_nonneg = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  };
  finite_nonneg(pair_rate, "pair_rate");
  finite_nonneg(accidental_rate_signal1, "accidental_rate_signal1");
  finite_nonneg(accidental_rate_signal2, "accidental_rate_signal2");
  for (auto [v, name] : {std::pair{transmission_signal1, "transmission_signal1"},
                         std::pair{transmission_signal2, "transmission_signal2"}}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
  }
  if (statistics == PairStatistics::thermal && !(thermal_auto_g2 >= 1.0 && std::isfinite(thermal_auto_g2))) {
    throw InvalidArgument("thermal_auto_g2 must be >= 1");
  }
  if (statistics != PairStatistics::thermal && pair_rate > 1.0) {
    throw InvalidArgument("pair_rate is a probability for this pair statistics and must be <= 1");
  }
  if (statistics == PairStatistics::fixed && fixed_pair_count < 1) {
    throw InvalidArgument("fixed_pair_count must be >= 1");
  }
  if (pulse_period_ns <= 0) throw InvalidArgument("pulse_period_ns must be > 0");
  if (window_count < 0) throw InvalidArgument("window_count must be >= 0");
  if (pair_delay_ns < 0 || pair_delay_ns >= pulse_period_ns) {
    throw InvalidArgument("pair_delay_ns must lie in [0, pulse_period_ns)");
  }
}

namespace {

std::vector<OamLabel> arm_labels(const SchmidtSpectrum& spectrum) {
  std::set<OamLabel> s;
  for (const auto& [label, c] : spectrum.coefficients()) {
    s.insert(label);
    s.insert(OamLabel{-label.l});
  }
  return {s.rbegin(), s.rend()};
}

optics::Conjugation flip_needed(const optics::OpticalPath& p) { return optics::path_conjugation(p); }

CMatrix relabel_and_flip(CMatrix sub, const optics::OpticalPath& s2, const optics::OpticalPath& s1) {
  Basis two = Basis::two_qubit();
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  if (flip_needed(s2) == optics::Conjugation::conjugate) sub = conjugate_on_arm(sub, two, Arm::signal2, x);
  if (flip_needed(s1) == optics::Conjugation::conjugate) sub = conjugate_on_arm(sub, two, Arm::signal1, x);
  return sub;
}

std::array<std::size_t, 4> subspace_indices(const Basis& basis, int l) {
  if (l < 1) throw InvalidArgument("post-selection needs l >= 1");
  if (basis.arms() != 2) throw InvalidArgument("post-selection needs a two-arm state");
  std::array<std::size_t, 4> idx{};
  const OamLabel pm[2] = {OamLabel{l}, OamLabel{-l}};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      std::array<OamLabel, 2> labels{pm[a], pm[b]};
      auto i = basis.index_of(labels);
      if (!i) throw InvalidArgument("state has no +-" + std::to_string(l) + " modes on both arms");
      idx[static_cast<std::size_t>(2 * a + b)] = *i;
    }
  }
  return idx;
}

}  // namespace

using optics::Conjugation;

Ket srs_state(const SchmidtSpectrum& spectrum) {
  auto labels = arm_labels(spectrum);
  Basis basis({labels, labels});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (const auto& [label, c] : spectrum.coefficients()) {
    std::array<OamLabel, 2> at{OamLabel{-label.l}, label};
    amps(static_cast<Eigen::Index>(*basis.index_of(at))) += c;
  }
  return Ket(basis, amps);
}

DensityMatrix postselect_2d(const Ket& state, int l, const optics::OpticalPath& signal2_path,
                            const optics::OpticalPath& signal1_path) {
  auto idx = subspace_indices(state.basis(), l);
  CVector v(4);
  for (int k = 0; k < 4; ++k) v(k) = state.amplitudes()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)]));
  double n2 = v.squaredNorm();
  if (n2 <= 0.0) throw InvalidArgument("state has no weight in the +-" + std::to_string(l) + " subspace");
  v /= std::sqrt(n2);
  return DensityMatrix(Basis::two_qubit(), relabel_and_flip(v * v.adjoint(), signal2_path, signal1_path));
}

DensityMatrix postselect_2d(const DensityMatrix& state, int l, const optics::OpticalPath& signal2_path,
                            const optics::OpticalPath& signal1_path) {
  auto idx = subspace_indices(state.basis(), l);
  CMatrix sub(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      sub(r, c) = state.matrix()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                                 static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    }
  }
  double tr = sub.trace().real();
  if (tr <= 0.0) throw InvalidArgument("state has no weight in the +-" + std::to_string(l) + " subspace");
  sub /= tr;
  return DensityMatrix(Basis::two_qubit(), relabel_and_flip(sub, signal2_path, signal1_path));
}

std::int64_t EmissionRecord::total_pairs() const {
  std::int64_t n = 0;
  for (const auto& w : windows) n += static_cast<std::int64_t>(w.pairs.size());
  return n;
}

double pair_second_factorial_moment(const SourceConfig& config, const SchmidtSpectrum& spectrum) {
  const double mu = config.pair_rate;
  switch (config.statistics) {
    case PairStatistics::thermal: {
      double sum_sq = 0.0;
      for (const auto& [label, c] : spectrum.coefficients()) sum_sq += std::pow(mu * std::norm(c), 2);
      return config.thermal_auto_g2 * sum_sq + mu * mu - sum_sq;
    }
    case PairStatistics::heralded_single:
      return 0.0;
    case PairStatistics::fixed:
      return mu * config.fixed_pair_count * (config.fixed_pair_count - 1);
  }
  return 0.0;
}

EmissionRecord sample_emissions(const SourceConfig& config, const SchmidtSpectrum& spectrum,
                                std::uint64_t seed) {
  config.validate();
  std::vector<std::pair<OamLabel, double>> modes;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [label, c] : spectrum.coefficients()) {
    modes.emplace_back(label, std::norm(c));
    acc += std::norm(c);
    cumulative.push_back(acc);
  }
  auto draw_label = [&](random::Engine& rng) {
    double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), modes.size() - 1);
    return modes[k].first;
  };
  const double shape = config.thermal_auto_g2 > 1.0 ? 1.0 / (config.thermal_auto_g2 - 1.0) : 0.0;

  auto work = [&](std::int64_t begin, std::int64_t end, std::vector<WindowEmission>& out) {
    for (std::int64_t w = begin; w < end; ++w) {
      random::Engine rng(seed, random::Stream::emission, static_cast<std::uint64_t>(w));
      WindowEmission e;
      e.window = w;
      auto add = [&](OamLabel l, int n) {
        for (int k = 0; k < n; ++k) e.pairs.push_back({l, OamLabel{-l.l}});
      };
      switch (config.statistics) {
        case PairStatistics::thermal:
          for (const auto& [label, q] : modes) {
            double mean = config.pair_rate * q;
            if (mean <= 0.0) continue;
            if (shape > 0.0) mean = std::gamma_distribution<double>(shape, mean / shape)(rng);
            if (mean > 0.0) add(label, std::poisson_distribution<int>(mean)(rng));
          }
          break;
        case PairStatistics::heralded_single:
          if (rng.uniform() < config.pair_rate) add(draw_label(rng), 1);
          break;
        case PairStatistics::fixed:
          if (rng.uniform() < config.pair_rate) {
            for (int k = 0; k < config.fixed_pair_count; ++k) add(draw_label(rng), 1);
          }
          break;
      }
      if (config.accidental_rate_signal1 > 0.0) {
        e.accidentals_signal1 = std::poisson_distribution<int>(config.accidental_rate_signal1)(rng);
      }
      if (config.accidental_rate_signal2 > 0.0) {
        e.accidentals_signal2 = std::poisson_distribution<int>(config.accidental_rate_signal2)(rng);
      }
      if (!e.pairs.empty() || e.accidentals_signal1 > 0 || e.accidentals_signal2 > 0) out.push_back(std::move(e));
    }
  };

  EmissionRecord record;
  record.window_count = config.window_count;
  record.pulse_period_ns = config.pulse_period_ns;
  record.pair_delay_ns = config.pair_delay_ns;
  record.windows = detail::parallel_collect<WindowEmission>(config.window_count, work);
  return record;
}

}  // namespace oamstore::source
