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

#ifndef OAMSTORE_HILBERT_HPP
#define OAMSTORE_HILBERT_HPP

// Linear algebra over small OAM-labelled Hilbert spaces.
//
// Basis conventions used everywhere in oamstore:
//   * A qubit arm is ordered (L, R), with L = OAM +1 and R = OAM -1.
//   * Bipartite spaces are ordered (signal 2) x (signal 1): tensor factor 0 is
//     signal 2, factor 1 is signal 1, the photon that goes through the memory.
//     Index of |a, b> is a * dim(signal 1) + b.
// Nothing below depends on which physical photon is which factor, but every
// module reads the arm order from Arm so it is decided here only.

#include <complex>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace oamstore {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kKetNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;

/// Quanta of orbital angular momentum carried by a mode, in units of hbar.
struct OamLabel {
  int l = 0;
  friend constexpr auto operator<=>(const OamLabel&, const OamLabel&) = default;
};

inline constexpr OamLabel kLabelL{+1};
inline constexpr OamLabel kLabelR{-1};

/// Tensor factor of the two-photon space.
enum class Arm : int { signal2 = 0, signal1 = 1 };

inline constexpr std::size_t arm_index(Arm arm) { return static_cast<std::size_t>(arm); }

/// Maps the user-facing arm number (1 = signal 1, 2 = signal 2) to an Arm.
Arm arm_from_signal_number(int signal);

/// Ordered product basis: one label list per arm, full basis is the row-major
/// tensor product of the arm lists.
class Basis {
 public:
  explicit Basis(std::vector<std::vector<OamLabel>> arm_labels);

  static Basis qubit();
  static Basis two_qubit();
  static Basis product(const Basis& a, const Basis& b);

  std::size_t arms() const { return arm_labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t arm_dim(std::size_t arm) const { return arm_labels_.at(arm).size(); }
  const std::vector<OamLabel>& arm_labels(std::size_t arm) const { return arm_labels_.at(arm); }

  /// Per-arm labels of basis element `index`.
  std::vector<OamLabel> label(std::size_t index) const;
  std::optional<std::size_t> index_of(std::span<const OamLabel> labels) const;

  /// "+1:-1" style text for one basis element.
  std::string label_text(std::size_t index) const;

  friend bool operator==(const Basis&, const Basis&) = default;

 private:
  std::vector<std::vector<OamLabel>> arm_labels_;
  std::size_t dim_ = 1;
};

class Ket {
 public:
  /// Throws InvalidArgument unless the amplitudes have unit norm.
  Ket(Basis basis, CVector amplitudes);

  /// Rescales to unit norm; throws on a zero vector.
  static Ket normalized(Basis basis, CVector amplitudes);

  const Basis& basis() const { return basis_; }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::span<const OamLabel> labels) const;

 private:
  Basis basis_;
  CVector amplitudes_;
};

/// Hermitian, trace-one, positive semidefinite (to the tolerances above).
class DensityMatrix {
 public:
  DensityMatrix(Basis basis, CMatrix matrix);

  static DensityMatrix pure(const Ket& ket);
  static DensityMatrix maximally_mixed(Basis basis);

  const Basis& basis() const { return basis_; }
  const CMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return basis_.dim(); }
  Complex operator()(std::size_t row, std::size_t col) const { return matrix_(row, col); }

  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const;

 private:
  Basis basis_;
  CMatrix matrix_;
};

/// Checks the DensityMatrix invariants; returns a description of the first
/// violation, or nothing.
std::optional<std::string> physicality_violation(const CMatrix& matrix);

enum class BellKind { phi_plus, psi_plus };

/// phi_plus = (|LL> + |RR>)/sqrt2, psi_plus = (|LR> + |RL>)/sqrt2.
Ket bell_state(BellKind kind);

/// p |base><base| + (1 - p) I/4.
DensityMatrix werner_state(double p, const Ket& base);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, clamped into [0, 1].
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// Frobenius-nearest trace-one PSD matrix to a Hermitian input. The eigenvalues
/// are projected onto the probability simplex, which clips negative weight and
/// renormalises the rest.
DensityMatrix nearest_physical(const Basis& basis, const CMatrix& hermitian);

/// Principal square root of a Hermitian PSD matrix; eigenvalues below the
/// physicality floor are treated as zero.
CMatrix hermitian_sqrt(const CMatrix& m);

Complex inner(const Ket& bra, const Ket& ket);
Ket tensor(const Ket& a, const Ket& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Traces out one factor of a bipartite operator with factor dimensions
/// (dim_first, dim_second). `traced` is the factor index (0 or 1).
CMatrix partial_trace(const CMatrix& m, std::size_t dim_first, std::size_t dim_second,
                      std::size_t traced);

/// Reduced state of one arm of a bipartite density matrix.
DensityMatrix reduced_state(const DensityMatrix& rho, Arm keep);

/// op applied to one arm of a bipartite operator: (op x I) m (op x I)^dagger.
CMatrix conjugate_on_arm(const CMatrix& m, const Basis& basis, Arm arm, const CMatrix& op);

/// Text format: "#basis=<label>,<label>,..." header, then one row per line with
/// comma-separated "re+imi" entries. Round-trips bit-exactly.
std::string to_text(const DensityMatrix& rho);
DensityMatrix density_matrix_from_text(std::string_view content);

/// Parses the row block of the text format without the physicality check.
CMatrix matrix_from_text(std::string_view content, Basis* basis_out);
std::string matrix_to_text(const Basis& basis, const CMatrix& m);

}  // namespace oamstore

#endif
