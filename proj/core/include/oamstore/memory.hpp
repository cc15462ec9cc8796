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

#ifndef OAMSTORE_MEMORY_HPP
#define OAMSTORE_MEMORY_HPP

#include "oamstore/hilbert.hpp"

namespace oamstore::memory {

/// eta(tau) = g0 + A exp(-(tau - tau0)/T), clamped into [0, 1].
struct EfficiencyFit {
  double g0 = -0.08;
  double amplitude = 0.38;
  double tau0_ns = 67.0;
  double decay_ns = 1434.0;

  void validate() const;
  /// Unclamped model value.
  double raw(double tau_ns) const;
  /// Same curve with the reference delay moved to new_tau0_ns.
  EfficiencyFit rebased(double new_tau0_ns) const;
};

/// Retrieval efficiency at storage time tau_ns >= 0.
double efficiency(const EfficiencyFit& fit, double tau_ns);

/// Storage noise acting on the stored arm. All fields default to zero (an
/// ideal memory); calibrated_noise() returns the shipped defaults.
struct MemoryNoise {
  /// Relative L/R phase diffusion: coherence *= exp(-rate tau).
  double dephasing_rate_per_ns = 0.0;
  /// Global admixture of I/4, independent of tau.
  double depolarizing_floor = 0.0;
  /// Population exchange between the stored +-l modes: the imbalance decays as
  /// exp(-rate tau) and the coherence as exp(-rate tau / 2).
  double mode_mixing_rate_per_ns = 0.0;
  /// Deterministic relative phase rate between the stored modes.
  double precession_rate_rad_per_ns = 0.0;

  void validate() const;
};

MemoryNoise calibrated_noise();

struct ChannelOutput {
  DensityMatrix rho;
  /// Retrieval probability of the stored photon; the state is the one
  /// conditioned on retrieval.
  double retrieval_probability;
};

/// Stores `stored` arm of a two-qubit state for tau_ns. Channel order:
/// dephasing, precession, mode mixing, depolarizing floor.
ChannelOutput apply_channel(const DensityMatrix& rho, Arm stored, double tau_ns,
                            const EfficiencyFit& fit, const MemoryNoise& noise);
/// stored_signal is 1 or 2.
ChannelOutput apply_channel(const DensityMatrix& rho, int stored_signal, double tau_ns,
                            const EfficiencyFit& fit, const MemoryNoise& noise);

}  // namespace oamstore::memory

#endif
