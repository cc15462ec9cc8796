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

#include "oamstore/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "oamstore/error.hpp"
#include "oamstore/text.hpp"

namespace oamstore {

namespace {

std::string oam_text(OamLabel label) {
  if (label.l > 0) return "+" + std::to_string(label.l);
  return std::to_string(label.l);
}

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) / 2.0; }

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Euclidean projection of a real vector onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    running += u[j];
    double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

std::string complex_text(Complex z) {
  std::string out = text::format_double(z.real());
  if (std::signbit(z.imag())) {
    out += "-" + text::format_double(-z.imag());
  } else {
    out += "+" + text::format_double(z.imag());
  }
  out += "i";
  return out;
}

Complex parse_complex(std::string_view field) {
  field = text::trim(field);
  if (field.size() < 2 || field.back() != 'i') {
    throw InvalidArgument("matrix entry '" + std::string(field) + "' is not of the form re+imi");
  }
  field.remove_suffix(1);
  std::size_t split = std::string_view::npos;
  for (std::size_t k = field.size(); k-- > 1;) {
    char c = field[k];
    if ((c == '+' || c == '-') && field[k - 1] != 'e' && field[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) {
    throw InvalidArgument("matrix entry '" + std::string(field) + "i' has no imaginary part");
  }
  double re = text::parse_double(field.substr(0, split), "real part");
  double im = text::parse_double(field.substr(split + 1), "imaginary part");
  return {re, field[split] == '-' ? -im : im};
}

Basis parse_basis_header(std::string_view line) {
  constexpr std::string_view kPrefix = "#basis=";
  if (line.substr(0, kPrefix.size()) != kPrefix) {
    throw InvalidArgument("density matrix text must start with '#basis='");
  }
  auto fields = text::split(line.substr(kPrefix.size()), ',');
  std::vector<std::vector<OamLabel>> per_element;
  for (auto f : fields) {
    std::vector<OamLabel> element;
    for (auto part : text::split(f, ':')) {
      element.push_back(OamLabel{static_cast<int>(text::parse_int(part, "OAM label"))});
    }
    if (!per_element.empty() && element.size() != per_element.front().size()) {
      throw InvalidArgument("basis labels have inconsistent arm counts");
    }
    per_element.push_back(std::move(element));
  }
  std::size_t arms = per_element.front().size();
  std::vector<std::vector<OamLabel>> arm_labels(arms);
  for (const auto& element : per_element) {
    for (std::size_t a = 0; a < arms; ++a) {
      auto& list = arm_labels[a];
      if (std::find(list.begin(), list.end(), element[a]) == list.end()) {
        list.push_back(element[a]);
      }
    }
  }
  Basis basis(arm_labels);
  if (basis.dim() != per_element.size()) {
    throw InvalidArgument("basis header is not a full product basis");
  }
  for (std::size_t k = 0; k < per_element.size(); ++k) {
    if (basis.label(k) != per_element[k]) {
      throw InvalidArgument("basis header is not in product order");
    }
  }
  return basis;
}

}  // namespace

Arm arm_from_signal_number(int signal) {
  switch (signal) {
    case 1:
      return Arm::signal1;
    case 2:
      return Arm::signal2;
    default:
      throw InvalidArgument("arm must be 1 (signal 1) or 2 (signal 2), got " +
                            std::to_string(signal));
  }
}

// ---------------------------------------------------------------------------
// Basis

Basis::Basis(std::vector<std::vector<OamLabel>> arm_labels) : arm_labels_(std::move(arm_labels)) {
  if (arm_labels_.empty()) throw InvalidArgument("basis needs at least one arm");
  for (const auto& labels : arm_labels_) {
    if (labels.empty()) throw InvalidArgument("basis arm has no labels");
    std::set<OamLabel> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size()) throw InvalidArgument("basis labels must be unique");
    dim_ *= labels.size();
  }
}

Basis Basis::qubit() { return Basis({{kLabelL, kLabelR}}); }

Basis Basis::two_qubit() { return Basis({{kLabelL, kLabelR}, {kLabelL, kLabelR}}); }

Basis Basis::product(const Basis& a, const Basis& b) {
  auto labels = a.arm_labels_;
  labels.insert(labels.end(), b.arm_labels_.begin(), b.arm_labels_.end());
  return Basis(std::move(labels));
}

std::vector<OamLabel> Basis::label(std::size_t index) const {
  if (index >= dim_) throw std::out_of_range("basis index out of range");
  std::vector<OamLabel> out(arm_labels_.size());
  for (std::size_t a = arm_labels_.size(); a-- > 0;) {
    const auto& labels = arm_labels_[a];
    out[a] = labels[index % labels.size()];
    index /= labels.size();
  }
  return out;
}

std::optional<std::size_t> Basis::index_of(std::span<const OamLabel> labels) const {
  if (labels.size() != arm_labels_.size()) return std::nullopt;
  std::size_t index = 0;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    const auto& list = arm_labels_[a];
    auto it = std::find(list.begin(), list.end(), labels[a]);
    if (it == list.end()) return std::nullopt;
    index = index * list.size() + static_cast<std::size_t>(it - list.begin());
  }
  return index;
}

std::string Basis::label_text(std::size_t index) const {
  auto labels = label(index);
  std::string out;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (a) out += ":";
    out += oam_text(labels[a]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ket / DensityMatrix

Ket::Ket(Basis basis, CVector amplitudes) : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_.dim()) {
    throw InvalidArgument("ket amplitude count does not match basis dimension");
  }
  double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kKetNormTolerance) {
    throw InvalidArgument("ket is not normalized (norm^2 = " + text::format_double(norm2) + ")");
  }
}

Ket Ket::normalized(Basis basis, CVector amplitudes) {
  double norm = amplitudes.norm();
  if (norm == 0.0) throw InvalidArgument("cannot normalize a zero vector");
  return Ket(std::move(basis), amplitudes / norm);
}

Complex Ket::amplitude(std::span<const OamLabel> labels) const {
  auto index = basis_.index_of(labels);
  return index ? amplitudes_(static_cast<Eigen::Index>(*index)) : Complex{};
}

std::optional<std::string> physicality_violation(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return "matrix is not square";
  double asym = max_abs(m - m.adjoint());
  if (asym > kHermitianTolerance) return "matrix is not Hermitian (deviation " + text::format_double(asym) + ")";
  Complex tr = m.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTolerance) {
    return "trace is " + text::format_double(tr.real()) + ", not 1";
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  double smallest = solver.eigenvalues().minCoeff();
  if (smallest < kEigenvalueFloor) {
    return "matrix has negative eigenvalue " + text::format_double(smallest);
  }
  return std::nullopt;
}

DensityMatrix::DensityMatrix(Basis basis, CMatrix matrix) : basis_(std::move(basis)) {
  if (static_cast<std::size_t>(matrix.rows()) != basis_.dim()) {
    throw InvalidArgument("density matrix size does not match basis dimension");
  }
  if (auto problem = physicality_violation(matrix)) {
    throw InvalidArgument("not a density matrix: " + *problem);
  }
  matrix_ = hermitian_part(matrix);
}

DensityMatrix DensityMatrix::pure(const Ket& ket) {
  return DensityMatrix(ket.basis(), ket.amplitudes() * ket.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Basis basis) {
  auto n = static_cast<Eigen::Index>(basis.dim());
  CMatrix m = CMatrix::Identity(n, n) / static_cast<double>(n);
  return DensityMatrix(std::move(basis), std::move(m));
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// ---------------------------------------------------------------------------
// Operations

Ket bell_state(BellKind kind) {
  const double h = 1.0 / std::sqrt(2.0);
  CVector amps = CVector::Zero(4);
  if (kind == BellKind::phi_plus) {
    amps(0) = h;
    amps(3) = h;
  } else {
    amps(1) = h;
    amps(2) = h;
  }
  return Ket(Basis::two_qubit(), amps);
}

DensityMatrix werner_state(double p, const Ket& base) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument("Werner weight p must lie in [0, 1], got " + text::format_double(p));
  }
  if (base.basis().arms() != 2 || base.basis().dim() != 4) {
    throw InvalidArgument("Werner base state must be a two-qubit ket");
  }
  CMatrix m = p * (base.amplitudes() * base.amplitudes().adjoint()) +
              (1.0 - p) * CMatrix::Identity(4, 4) / 4.0;
  return DensityMatrix(base.basis(), m);
}

CMatrix hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  // Eigenvalues at rounding level are zeros; their square roots would not be.
  Eigen::VectorXd values = solver.eigenvalues();
  const double cutoff = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(values.size()) *
                        std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd roots = values.unaryExpr([cutoff](double x) { return x > cutoff ? std::sqrt(x) : 0.0; });
  const CMatrix& v = solver.eigenvectors();
  return v * roots.cast<Complex>().asDiagonal() * v.adjoint();
}

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("fidelity: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
  CMatrix root = hermitian_sqrt(a.matrix());
  CMatrix inner_product = root * b.matrix() * root;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(inner_product), Eigen::EigenvaluesOnly);
  Eigen::VectorXd values = solver.eigenvalues();
  const double cutoff = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(values.size()) *
                        std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  double trace_root = 0.0;
  for (double x : values) trace_root += x > cutoff ? std::sqrt(x) : 0.0;
  return std::clamp(trace_root * trace_root, 0.0, 1.0);
}

DensityMatrix nearest_physical(const Basis& basis, const CMatrix& hermitian) {
  if (hermitian.rows() != hermitian.cols() ||
      static_cast<std::size_t>(hermitian.rows()) != basis.dim()) {
    throw InvalidArgument("nearest_physical: matrix size does not match basis");
  }
  double scale = std::max(1.0, max_abs(hermitian));
  if (max_abs(hermitian - hermitian.adjoint()) > kHermitianTolerance * scale) {
    throw InvalidArgument("nearest_physical: input is not Hermitian");
  }
  if (!physicality_violation(hermitian)) return DensityMatrix(basis, hermitian);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(hermitian));
  Eigen::VectorXd weights = project_to_simplex(solver.eigenvalues());
  const CMatrix& v = solver.eigenvectors();
  CMatrix out = v * weights.cast<Complex>().asDiagonal() * v.adjoint();
  return DensityMatrix(basis, hermitian_part(out));
}

Complex inner(const Ket& bra, const Ket& ket) {
  if (bra.basis().dim() != ket.basis().dim()) throw InvalidArgument("inner: dimension mismatch");
  return bra.amplitudes().dot(ket.amplitudes());
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Ket tensor(const Ket& a, const Ket& b) {
  return Ket::normalized(Basis::product(a.basis(), b.basis()),
                         kron(a.amplitudes(), b.amplitudes()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(Basis::product(a.basis(), b.basis()), kron(a.matrix(), b.matrix()));
}

CMatrix partial_trace(const CMatrix& m, std::size_t dim_first, std::size_t dim_second,
                      std::size_t traced) {
  auto da = static_cast<Eigen::Index>(dim_first);
  auto db = static_cast<Eigen::Index>(dim_second);
  if (m.rows() != da * db || m.cols() != da * db) {
    throw InvalidArgument("partial_trace: matrix size does not match factor dimensions");
  }
  if (traced == 1) {
    CMatrix out = CMatrix::Zero(da, da);
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index a2 = 0; a2 < da; ++a2)
        for (Eigen::Index b = 0; b < db; ++b) out(a, a2) += m(a * db + b, a2 * db + b);
    return out;
  }
  if (traced == 0) {
    CMatrix out = CMatrix::Zero(db, db);
    for (Eigen::Index b = 0; b < db; ++b)
      for (Eigen::Index b2 = 0; b2 < db; ++b2)
        for (Eigen::Index a = 0; a < da; ++a) out(b, b2) += m(a * db + b, a * db + b2);
    return out;
  }
  throw InvalidArgument("partial_trace: factor index must be 0 or 1");
}

DensityMatrix reduced_state(const DensityMatrix& rho, Arm keep) {
  const Basis& basis = rho.basis();
  if (basis.arms() != 2) throw InvalidArgument("reduced_state needs a bipartite state");
  std::size_t kept = arm_index(keep);
  CMatrix m = partial_trace(rho.matrix(), basis.arm_dim(0), basis.arm_dim(1), 1 - kept);
  return DensityMatrix(Basis({basis.arm_labels(kept)}), m);
}

CMatrix conjugate_on_arm(const CMatrix& m, const Basis& basis, Arm arm, const CMatrix& op) {
  if (basis.arms() != 2) throw InvalidArgument("conjugate_on_arm needs a bipartite basis");
  auto d0 = static_cast<Eigen::Index>(basis.arm_dim(0));
  auto d1 = static_cast<Eigen::Index>(basis.arm_dim(1));
  CMatrix full = arm == Arm::signal2 ? kron(op, CMatrix::Identity(d1, d1))
                                     : kron(CMatrix::Identity(d0, d0), op);
  return full * m * full.adjoint();
}

// ---------------------------------------------------------------------------
// Text format

std::string matrix_to_text(const Basis& basis, const CMatrix& m) {
  std::string out = "#basis=";
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    if (k) out += ",";
    out += basis.label_text(k);
  }
  out += "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ",";
      out += complex_text(m(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string to_text(const DensityMatrix& rho) { return matrix_to_text(rho.basis(), rho.matrix()); }

CMatrix matrix_from_text(std::string_view content, Basis* basis_out) {
  auto all = text::lines(content);
  std::vector<std::string_view> rows;
  for (auto line : all) {
    if (!text::trim(line).empty()) rows.push_back(line);
  }
  if (rows.empty()) throw InvalidArgument("density matrix text is empty");
  Basis basis = parse_basis_header(text::trim(rows.front()));
  auto n = static_cast<Eigen::Index>(basis.dim());
  if (static_cast<Eigen::Index>(rows.size()) - 1 != n) {
    throw InvalidArgument("density matrix text has " + std::to_string(rows.size() - 1) +
                          " rows, expected " + std::to_string(n));
  }
  CMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    auto fields = text::split(rows[static_cast<std::size_t>(r) + 1], ',');
    if (static_cast<Eigen::Index>(fields.size()) != n) {
      throw InvalidArgument("density matrix row " + std::to_string(r + 1) + " has " +
                            std::to_string(fields.size()) + " entries, expected " +
                            std::to_string(n));
    }
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = parse_complex(fields[static_cast<std::size_t>(c)]);
  }
  if (basis_out) *basis_out = basis;
  return m;
}

DensityMatrix density_matrix_from_text(std::string_view content) {
  Basis basis = Basis::qubit();
  CMatrix m = matrix_from_text(content, &basis);
  return DensityMatrix(basis, m);
}

}  // namespace oamstore
