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

#ifndef OAMSTORE_OPTICS_HPP
#define OAMSTORE_OPTICS_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "oamstore/hilbert.hpp"

namespace oamstore::optics {

/// Orientation of an angular sector mask on an SLM. Masks are symmetric under a
/// half turn, so the angle is kept canonical in [0, pi).
class SectorAngle {
 public:
  explicit SectorAngle(double theta_rad);
  double radians() const { return theta_; }
  SectorAngle rotated(double delta_rad) const { return SectorAngle(theta_ + delta_rad); }

 private:
  double theta_;
};

/// Mirror and relay bookkeeping for one optical route.
struct OpticalPath {
  int mirror_count = 0;
  bool has_4f_inversion = false;
};

enum class Conjugation { identity, conjugate };

/// Every reflection and every 4-f image inversion maps l to -l; an odd total
/// conjugates the arm.
Conjugation path_conjugation(const OpticalPath& path);

/// Residual imperfections of one arm's mode analysis. These are calibration
/// parameters: `crosstalk` is the probability that an l = +-1 photon is
/// registered in the opposite mode with a random relative phase,
/// `phase_offset_rad` a fixed phase on |R> relative to |L>.
struct ModeImperfection {
  double crosstalk = 0.0;
  double phase_offset_rad = 0.0;
};

/// |L>, |R>, (|L>+|R>)/sqrt2, (|L>-i|R>)/sqrt2, in that order.
std::vector<Ket> tomography_basis();
/// Short names for the tomography basis, used in CSV headers.
const std::array<std::string_view, 4>& tomography_state_names();

/// (|L> + e^{i2theta}|R>)/sqrt2, or the conjugate phase e^{-i2theta}.
Ket sector_state(SectorAngle theta, Conjugation conjugation = Conjugation::identity);

/// A pair of single-photon projectors, one per arm, with the SLM metadata they
/// came from. Arm order follows the global convention (signal 2, signal 1).
struct MeasurementSetting {
  Ket signal2;
  Ket signal1;
  std::string label;

  /// |signal2><signal2| x |signal1><signal1|.
  CMatrix projector() const;
};

/// Sector-mask setting for arm angles (theta_signal2, theta_signal1).
MeasurementSetting sector_setting(SectorAngle theta_signal2, SectorAngle theta_signal1,
                                  Conjugation conj_signal2, Conjugation conj_signal1);

/// All 16 products of the tomography basis, row-major: index 4*i + j measures
/// state i on signal 2 and state j on signal 1.
std::vector<MeasurementSetting> tomography_settings();

struct OamCapacity {
  int l_max = 0;
  /// Labels -l_max..-1 and 1..l_max.
  int dimension = 0;
};

/// Largest l whose LG waist sqrt(l+1) w0 still fits the atomic ensemble.
OamCapacity max_oam_quantum(double w0_um, double ensemble_radius_um);

/// Swaps L and R on one arm of a two-qubit state.
DensityMatrix flip_arm(const DensityMatrix& rho, Arm arm);

/// rho -> (1 - eps) rho + eps (X rho X + Y rho Y)/2 on one arm: populations
/// leak to the opposite mode and the leaked part carries no coherence.
DensityMatrix apply_mode_crosstalk(const DensityMatrix& rho, Arm arm, double epsilon);

/// diag(1, e^{i phase}) on one arm.
DensityMatrix apply_arm_phase(const DensityMatrix& rho, Arm arm, double phase_rad);

DensityMatrix apply_imperfection(const DensityMatrix& rho, Arm arm, const ModeImperfection& imp);

}  // namespace oamstore::optics

#endif
