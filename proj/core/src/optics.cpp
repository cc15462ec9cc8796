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

#include "oamstore/optics.hpp"

#include <cmath>
#include <numbers>

#include "oamstore/error.hpp"
#include "oamstore/text.hpp"

namespace oamstore::optics {

namespace {

void require_two_qubit(const DensityMatrix& rho, const char* what) {
  if (rho.basis().arms() != 2 || rho.basis().arm_dim(0) != 2 || rho.basis().arm_dim(1) != 2) {
    throw InvalidArgument(std::string(what) + " needs a two-qubit state");
  }
}

CMatrix pauli_x() {
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  return x;
}

CMatrix pauli_y() {
  CMatrix y = CMatrix::Zero(2, 2);
  y(0, 1) = Complex(0.0, -1.0);
  y(1, 0) = Complex(0.0, 1.0);
  return y;
}

}  // namespace

SectorAngle::SectorAngle(double theta_rad) {
  if (!std::isfinite(theta_rad)) throw InvalidArgument("sector angle must be finite");
  double t = std::fmod(theta_rad, std::numbers::pi);
  if (t < 0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  theta_ = t;
}

Conjugation path_conjugation(const OpticalPath& path) {
  if (path.mirror_count < 0) throw InvalidArgument("mirror count cannot be negative");
  int flips = path.mirror_count + (path.has_4f_inversion ? 1 : 0);
  return flips % 2 ? Conjugation::conjugate : Conjugation::identity;
}

std::vector<Ket> tomography_basis() {
  const double h = 1.0 / std::sqrt(2.0);
  Basis q = Basis::qubit();
  CVector l(2), r(2), d(2), a(2);
  l << 1.0, 0.0;
  r << 0.0, 1.0;
  d << h, h;
  a << h, Complex(0.0, -h);
  return {Ket(q, l), Ket(q, r), Ket(q, d), Ket(q, a)};
}

const std::array<std::string_view, 4>& tomography_state_names() {
  static const std::array<std::string_view, 4> names{"L", "R", "L+R", "L-iR"};
  return names;
}

Ket sector_state(SectorAngle theta, Conjugation conjugation) {
  double phase = 2.0 * theta.radians();
  if (conjugation == Conjugation::conjugate) phase = -phase;
  const double h = 1.0 / std::sqrt(2.0);
  CVector v(2);
  v << h, h * std::polar(1.0, phase);
  return Ket(Basis::qubit(), v);
}

CMatrix MeasurementSetting::projector() const {
  CMatrix a = signal2.amplitudes() * signal2.amplitudes().adjoint();
  CMatrix b = signal1.amplitudes() * signal1.amplitudes().adjoint();
  return kron(a, b);
}

MeasurementSetting sector_setting(SectorAngle theta_signal2, SectorAngle theta_signal1,
                                  Conjugation conj_signal2, Conjugation conj_signal1) {
  return MeasurementSetting{sector_state(theta_signal2, conj_signal2),
                            sector_state(theta_signal1, conj_signal1),
                            "sector(" + text::format_double(theta_signal2.radians()) + "," +
                                text::format_double(theta_signal1.radians()) + ")"};
}

std::vector<MeasurementSetting> tomography_settings() {
  auto basis = tomography_basis();
  const auto& names = tomography_state_names();
  std::vector<MeasurementSetting> out;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      out.push_back({basis[i], basis[j], std::string(names[i]) + "," + std::string(names[j])});
    }
  }
  return out;
}

OamCapacity max_oam_quantum(double w0_um, double ensemble_radius_um) {
  if (!(w0_um > 0.0) || !(ensemble_radius_um > 0.0)) {
    throw InvalidArgument("beam waist and ensemble radius must be positive");
  }
  double ratio = ensemble_radius_um / w0_um;
  auto fits = [&](long l) { return std::sqrt(static_cast<double>(l + 1)) * w0_um <= ensemble_radius_um; };
  long l = static_cast<long>(std::floor(ratio * ratio)) - 1;
  // Guard the floor against rounding in ratio^2.
  while (fits(l + 1)) ++l;
  while (l > 0 && !fits(l)) --l;
  if (l < 0) l = 0;
  return {static_cast<int>(l), static_cast<int>(2 * l)};
}

DensityMatrix flip_arm(const DensityMatrix& rho, Arm arm) {
  require_two_qubit(rho, "flip_arm");
  return DensityMatrix(rho.basis(), conjugate_on_arm(rho.matrix(), rho.basis(), arm, pauli_x()));
}

DensityMatrix apply_mode_crosstalk(const DensityMatrix& rho, Arm arm, double epsilon) {
  require_two_qubit(rho, "apply_mode_crosstalk");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidArgument("crosstalk probability must lie in [0, 1]");
  }
  if (epsilon == 0.0) return rho;
  const CMatrix& m = rho.matrix();
  CMatrix leaked = 0.5 * (conjugate_on_arm(m, rho.basis(), arm, pauli_x()) +
                          conjugate_on_arm(m, rho.basis(), arm, pauli_y()));
  return DensityMatrix(rho.basis(), (1.0 - epsilon) * m + epsilon * leaked);
}

DensityMatrix apply_arm_phase(const DensityMatrix& rho, Arm arm, double phase_rad) {
  require_two_qubit(rho, "apply_arm_phase");
  if (phase_rad == 0.0) return rho;
  CMatrix u = CMatrix::Identity(2, 2);
  u(1, 1) = std::polar(1.0, phase_rad);
  return DensityMatrix(rho.basis(), conjugate_on_arm(rho.matrix(), rho.basis(), arm, u));
}

DensityMatrix apply_imperfection(const DensityMatrix& rho, Arm arm, const ModeImperfection& imp) {
  return apply_mode_crosstalk(apply_arm_phase(rho, arm, imp.phase_offset_rad), arm, imp.crosstalk);
}

}  // namespace oamstore::optics
