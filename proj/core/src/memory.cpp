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

#include "oamstore/memory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oamstore/error.hpp"
#include "oamstore/optics.hpp"

namespace oamstore::memory {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be finite");
}

}  // namespace

void EfficiencyFit::validate() const {
  require_finite(g0, "g0");
  require_finite(amplitude, "amplitude");
  require_finite(tau0_ns, "tau0_ns");
  require_finite(decay_ns, "decay_ns");
  if (decay_ns <= 0.0) throw InvalidArgument("decay_ns must be > 0");
  if (amplitude < 0.0) throw InvalidArgument("amplitude must be >= 0");
}

double EfficiencyFit::raw(double tau_ns) const {
  return g0 + amplitude * std::exp(-(tau_ns - tau0_ns) / decay_ns);
}

EfficiencyFit EfficiencyFit::rebased(double new_tau0_ns) const {
  require_finite(new_tau0_ns, "tau0_ns");
  EfficiencyFit out = *this;
  out.amplitude = amplitude * std::exp(-(new_tau0_ns - tau0_ns) / decay_ns);
  out.tau0_ns = new_tau0_ns;
  return out;
}

double efficiency(const EfficiencyFit& fit, double tau_ns) {
  fit.validate();
  if (!(tau_ns >= 0.0) || !std::isfinite(tau_ns)) throw InvalidArgument("storage time must be >= 0");
  return std::clamp(fit.raw(tau_ns), 0.0, 1.0);
}

void MemoryNoise::validate() const {
  require_finite(precession_rate_rad_per_ns, "precession_rate_rad_per_ns");
  for (auto [v, name] : {std::pair{dephasing_rate_per_ns, "dephasing_rate_per_ns"},
                         std::pair{mode_mixing_rate_per_ns, "mode_mixing_rate_per_ns"}}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be >= 0");
  }
  if (!(depolarizing_floor >= 0.0 && depolarizing_floor <= 1.0)) {
    throw InvalidArgument("depolarizing_floor must lie in [0, 1]");
  }
}

MemoryNoise calibrated_noise() {
  MemoryNoise n;
  n.dephasing_rate_per_ns = 1e-4;
  n.depolarizing_floor = 0.01;
  n.mode_mixing_rate_per_ns = 1.05e-3;
  n.precession_rate_rad_per_ns = -3.9e-3;
  return n;
}

ChannelOutput apply_channel(const DensityMatrix& rho, Arm stored, double tau_ns, const EfficiencyFit& fit,
                            const MemoryNoise& noise) {
  noise.validate();
  if (rho.basis() != Basis::two_qubit()) throw InvalidArgument("memory channel needs a two-qubit state");
  const double eta = efficiency(fit, tau_ns);
  const Basis& basis = rho.basis();

  Eigen::Matrix2cd x, y, z;
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  auto pauli_channel = [&](const CMatrix& m, double px, double py, double pz) {
    CMatrix out = (1.0 - px - py - pz) * m;
    if (px > 0) out += px * conjugate_on_arm(m, basis, stored, x);
    if (py > 0) out += py * conjugate_on_arm(m, basis, stored, y);
    if (pz > 0) out += pz * conjugate_on_arm(m, basis, stored, z);
    return out;
  };

  CMatrix m = rho.matrix();
  const double lambda = std::exp(-noise.dephasing_rate_per_ns * tau_ns);
  m = pauli_channel(m, 0.0, 0.0, (1.0 - lambda) / 2.0);

  const double phase = noise.precession_rate_rad_per_ns * tau_ns;
  Eigen::Matrix2cd ph;
  ph << 1, 0, 0, std::polar(1.0, phase);
  m = conjugate_on_arm(m, basis, stored, ph);

  // Pauli channel with x,y weight p and z weight q: population factor 1 - 4p,
  // coherence factor 1 - 2p - 2q.
  const double u = std::exp(-noise.mode_mixing_rate_per_ns * tau_ns / 2.0);
  const double p = (1.0 - u * u) / 4.0;
  const double q = (1.0 - u) * (1.0 - u) / 4.0;
  m = pauli_channel(m, p, p, q);

  const double f = noise.depolarizing_floor;
  m = (1.0 - f) * m + f * CMatrix::Identity(4, 4) / 4.0;
  return {DensityMatrix(basis, m), eta};
}

ChannelOutput apply_channel(const DensityMatrix& rho, int stored_signal, double tau_ns, const EfficiencyFit& fit,
                            const MemoryNoise& noise) {
  return apply_channel(rho, arm_from_signal_number(stored_signal), tau_ns, fit, noise);
}

}  // namespace oamstore::memory
