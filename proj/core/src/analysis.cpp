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

#include "oamstore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "oamstore/error.hpp"
#include "oamstore/random.hpp"

namespace oamstore::analysis {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr int kParams = 16;

void check_counts(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " counts must be finite and >= 0");
  }
}

/// Tomography basis kets as 4-vectors, index 4*i + j.
const std::vector<CVector>& tomography_vectors() {
  static const std::vector<CVector> vs = [] {
    std::vector<CVector> out;
    for (const auto& s : optics::tomography_settings()) {
      out.push_back(tensor(s.signal2, s.signal1).amplitudes());
    }
    return out;
  }();
  return vs;
}

CMatrix lower_from_parameters(std::span<const double> t) {
  if (t.size() != kParams) throw InvalidArgument("expected 16 Cholesky parameters");
  CMatrix T = CMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) T(i, i) = t[static_cast<std::size_t>(i)];
  std::size_t k = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      T(i, j) = Complex(t[k], t[k + 1]);
      k += 2;
    }
  }
  return T;
}

std::vector<double> parameters_from_lower(const CMatrix& T) {
  std::vector<double> t(kParams);
  for (int i = 0; i < 4; ++i) t[static_cast<std::size_t>(i)] = T(i, i).real();
  std::size_t k = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      t[k] = T(i, j).real();
      t[k + 1] = T(i, j).imag();
      k += 2;
    }
  }
  return t;
}

struct LikelihoodTerms {
  std::array<double, 16> p{};
  double sum_p = 0.0;
  double trace = 0.0;
};

LikelihoodTerms terms(const CMatrix& T) {
  LikelihoodTerms out;
  const auto& vs = tomography_vectors();
  out.trace = T.squaredNorm();
  for (std::size_t k = 0; k < 16; ++k) {
    out.p[k] = (T * vs[k]).squaredNorm() / out.trace;
    out.sum_p += out.p[k];
  }
  return out;
}

double likelihood_from_terms(const std::vector<double>& n, double total, const LikelihoodTerms& lt) {
  double l = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    if (n[k] > 0.0) l += n[k] * std::log(std::max(lt.p[k], kProbabilityFloor));
  }
  return l - total * std::log(lt.sum_p);
}

struct Objective {
  std::vector<double> n;
  double total = 0.0;

  double value(std::span<const double> t) const {
    CMatrix T = lower_from_parameters(t);
    if (T.squaredNorm() <= 0.0) return std::numeric_limits<double>::infinity();
    return -likelihood_from_terms(n, total, terms(T)) / total;
  }

  std::vector<double> gradient(std::span<const double> t) const {
    CMatrix T = lower_from_parameters(t);
    LikelihoodTerms lt = terms(T);
    const auto& vs = tomography_vectors();
    CMatrix G = CMatrix::Zero(4, 4);
    for (std::size_t k = 0; k < 16; ++k) {
      double w = -total / lt.sum_p;
      if (n[k] > 0.0 && lt.p[k] > kProbabilityFloor) w += n[k] / lt.p[k];
      G += w * (vs[k] * vs[k].adjoint());
    }
    CMatrix rho = T.adjoint() * T / lt.trace;
    Complex g_rho = (G * rho).trace();
    CMatrix Gp = (G - g_rho.real() * CMatrix::Identity(4, 4)) / lt.trace;
    CMatrix M = Gp * T.adjoint();
    std::vector<double> grad(kParams);
    for (int i = 0; i < 4; ++i) grad[static_cast<std::size_t>(i)] = -2.0 * M(i, i).real() / total;
    std::size_t k = 4;
    for (int i = 1; i < 4; ++i) {
      for (int j = 0; j < i; ++j) {
        grad[k] = -2.0 * M(j, i).real() / total;
        grad[k + 1] = 2.0 * M(j, i).imag() / total;
        k += 2;
      }
    }
    return grad;
  }
};

Objective make_objective(const CountTable16& table) {
  table.validate();
  Objective obj;
  obj.n = table.flat();
  for (double v : obj.n) obj.total += v;
  if (obj.total <= 0.0) throw InvalidArgument("tomography table has no positive counts");
  return obj;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct BfgsRun {
  std::vector<double> x;
  double f = 0.0;
  double gnorm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// Minimises obj from x0. Only steps that satisfy the Armijo condition are
/// accepted, so f never increases.
BfgsRun bfgs(const Objective& obj, std::vector<double> x0, const MleOptions& opt, int iteration_budget) {
  const std::size_t n = x0.size();
  BfgsRun run;
  run.x = std::move(x0);
  run.f = obj.value(run.x);
  std::vector<double> g = obj.gradient(run.x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  int stalls = 0;
  if (opt.record_trace) run.trace.push_back(-run.f * obj.total);
  for (run.iterations = 0; run.iterations < iteration_budget; ++run.iterations) {
    run.gnorm = norm(g);
    if (run.gnorm <= opt.gradient_tolerance) {
      run.converged = true;
      break;
    }
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd d = -H * gv;
    double slope = d.dot(gv);
    if (!(slope < 0.0)) {
      H.setIdentity();
      d = -gv;
      slope = -gv.squaredNorm();
    }
    double step = 1.0;
    std::vector<double> xn(n);
    double fn = 0.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = run.x[i] + step * d(static_cast<Eigen::Index>(i));
      fn = obj.value(xn);
      if (std::isfinite(fn) && fn <= run.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (++stalls >= 2) break;
      H.setIdentity();
      continue;
    }
    stalls = 0;
    std::vector<double> gn = obj.gradient(xn);
    Eigen::VectorXd s(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      s(static_cast<Eigen::Index>(i)) = xn[i] - run.x[i];
      y(static_cast<Eigen::Index>(i)) = gn[i] - g[i];
    }
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (run.iterations == 0) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      Eigen::VectorXd Hy = H * y;
      H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
    run.x = std::move(xn);
    run.f = fn;
    g = std::move(gn);
    // f is invariant under t -> c t; keep |t| near 1 so the gradient test
    // stays meaningful.
    const double nx = norm(run.x);
    if (std::abs(nx - 1.0) > 0.1) {
      for (double& v : run.x) v /= nx;
      for (double& v : g) v *= nx;
      H /= nx * nx;
    }
    if (opt.record_trace) run.trace.push_back(-run.f * obj.total);
  }
  run.gnorm = norm(g);
  if (run.gnorm <= opt.gradient_tolerance) run.converged = true;
  return run;
}

std::vector<double> normalised(std::vector<double> t) {
  double s = 0.0;
  for (double v : t) s += v * v;
  s = std::sqrt(s);
  for (double& v : t) v /= s;
  return t;
}

}  // namespace

void CountTable16::validate() const {
  check_counts(flat(), "tomography");
  if (!(integration_time_s >= 0.0) || !std::isfinite(integration_time_s)) {
    throw InvalidArgument("integration_time_s must be >= 0");
  }
}

std::vector<double> CountTable16::flat() const {
  std::vector<double> v;
  v.reserve(16);
  for (const auto& row : counts) v.insert(v.end(), row.begin(), row.end());
  return v;
}

CountTable16 CountTable16::from_flat(std::span<const double> values, double integration_time_s) {
  if (values.size() != 16) throw InvalidArgument("a tomography table has 16 entries");
  CountTable16 t;
  for (std::size_t k = 0; k < 16; ++k) t.counts[k / 4][k % 4] = values[k];
  t.integration_time_s = integration_time_s;
  t.validate();
  return t;
}

std::vector<double> expected_rates(const DensityMatrix& rho, const std::vector<optics::MeasurementSetting>& settings,
                                   double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale must be > 0");
  if (rho.basis() != Basis::two_qubit()) throw InvalidArgument("expected counts need a two-qubit state");
  std::vector<double> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    CVector v = tensor(s.signal2, s.signal1).amplitudes();
    double p = (v.adjoint() * rho.matrix() * v)(0, 0).real();
    out.push_back(scale * std::max(p, 0.0));
  }
  return out;
}

CountTable16 expected_counts(const DensityMatrix& rho, double scale) {
  return CountTable16::from_flat(expected_rates(rho, optics::tomography_settings(), scale));
}

std::vector<double> subtract_background(std::span<const double> raw, std::span<const double> background) {
  if (raw.size() != background.size()) throw InvalidArgument("background table does not match the raw table");
  check_counts(raw, "raw");
  check_counts(background, "background");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::max(raw[i] - background[i], 0.0);
  return out;
}

CountTable16 subtract_background(const CountTable16& raw, const CountTable16& background) {
  auto r = raw.flat();
  auto b = background.flat();
  return CountTable16::from_flat(subtract_background(r, b), raw.integration_time_s);
}

TomographyResult tomo_linear(const CountTable16& table, const DensityMatrix& ideal) {
  table.validate();
  static const Eigen::FullPivLU<Eigen::MatrixXd> lu = [] {
    // Gamma_k = sigma_a x sigma_b / 2 is orthonormal under the trace inner
    // product; B(v, k) = <v| Gamma_k |v>.
    std::array<Eigen::Matrix2cd, 4> pauli;
    pauli[0] << 1, 0, 0, 1;
    pauli[1] << 0, 1, 1, 0;
    pauli[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    pauli[3] << 1, 0, 0, -1;
    Eigen::MatrixXd B(16, 16);
    const auto& vs = tomography_vectors();
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        CMatrix gamma = kron(pauli[static_cast<std::size_t>(a)], pauli[static_cast<std::size_t>(b)]) / 2.0;
        for (std::size_t v = 0; v < 16; ++v) {
          B(static_cast<Eigen::Index>(v), 4 * a + b) = (vs[v].adjoint() * gamma * vs[v])(0, 0).real();
        }
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> f(B);
    if (f.rank() != 16) throw std::logic_error("tomography projectors are not informationally complete");
    return f;
  }();

  const auto n = table.flat();
  // Settings (L,L), (L,R), (R,L), (R,R) have indices 0, 1, 4, 5.
  const double total = n[0] + n[1] + n[4] + n[5];
  if (total <= 0.0) throw EstimatorFailure("no counts in the {L,R} x {L,R} settings; cannot normalise");
  Eigen::VectorXd freq(16);
  for (int k = 0; k < 16; ++k) freq(k) = n[static_cast<std::size_t>(k)] / total;
  Eigen::VectorXd r = lu.solve(freq);

  std::array<Eigen::Matrix2cd, 4> pauli;
  pauli[0] << 1, 0, 0, 1;
  pauli[1] << 0, 1, 1, 0;
  pauli[2] << 0, Complex(0, -1), Complex(0, 1), 0;
  pauli[3] << 1, 0, 0, -1;
  CMatrix raw = CMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      raw += r(4 * a + b) * kron(pauli[static_cast<std::size_t>(a)], pauli[static_cast<std::size_t>(b)]) / 2.0;
    }
  }
  raw = (raw + raw.adjoint()) / 2.0;
  DensityMatrix rho = nearest_physical(Basis::two_qubit(), raw);
  TomographyResult out(rho, TomographyMethod::linear);
  out.raw = raw;
  out.log_likelihood = std::numeric_limits<double>::quiet_NaN();
  out.fidelity_to_ideal = fidelity(ideal, rho);
  out.fidelity_std = std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<double> cholesky_parameters(const DensityMatrix& rho) {
  if (rho.basis() != Basis::two_qubit()) throw InvalidArgument("Cholesky parameters need a two-qubit state");
  // rho = T^dagger T with T lower: factor the index-reversed matrix as L L^dagger,
  // then T = J L^dagger J.
  Eigen::PermutationMatrix<4> J;
  J.indices() << 3, 2, 1, 0;
  CMatrix reversed = J * rho.matrix() * J;
  Eigen::LLT<CMatrix> llt(reversed);
  if (llt.info() != Eigen::Success) throw InvalidArgument("Cholesky parameters need a full-rank state");
  CMatrix L = llt.matrixL();
  CMatrix T = J * CMatrix(L.adjoint()) * J;
  return parameters_from_lower(T);
}

DensityMatrix density_from_parameters(std::span<const double> t) {
  CMatrix T = lower_from_parameters(t);
  double tr = T.squaredNorm();
  if (tr <= 0.0) throw InvalidArgument("Cholesky parameters are all zero");
  return DensityMatrix(Basis::two_qubit(), T.adjoint() * T / tr);
}

double likelihood_at(const CountTable16& table, std::span<const double> t) {
  Objective obj = make_objective(table);
  return -obj.value(t) * obj.total;
}

std::vector<double> likelihood_gradient(const CountTable16& table, std::span<const double> t) {
  Objective obj = make_objective(table);
  auto g = obj.gradient(t);
  for (double& v : g) v *= -obj.total;
  return g;
}

double profile_log_likelihood(const CountTable16& table, const DensityMatrix& rho) {
  Objective obj = make_objective(table);
  LikelihoodTerms lt;
  const auto& vs = tomography_vectors();
  for (std::size_t k = 0; k < 16; ++k) {
    lt.p[k] = std::max((vs[k].adjoint() * rho.matrix() * vs[k])(0, 0).real(), 0.0);
    lt.sum_p += lt.p[k];
  }
  return likelihood_from_terms(obj.n, obj.total, lt);
}

TomographyResult tomo_mle(const CountTable16& table, const MleOptions& options, const DensityMatrix& ideal) {
  Objective obj = make_objective(table);
  if (options.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(Basis::two_qubit());

  DensityMatrix start = mixed;
  if (options.initial) {
    start = *options.initial;
  } else {
    auto n = obj.n;
    if (n[0] + n[1] + n[4] + n[5] > 0.0) start = tomo_linear(table, ideal).rho;
  }
  if (start.basis() != Basis::two_qubit()) throw InvalidArgument("MLE initial state must be two-qubit");
  DensityMatrix blended(Basis::two_qubit(), 0.9 * start.matrix() + 0.1 * mixed.matrix());

  BfgsRun best = bfgs(obj, normalised(cholesky_parameters(blended)), options, options.max_iterations);
  int used = best.iterations;
  if (!best.converged && used < options.max_iterations) {
    BfgsRun again = bfgs(obj, normalised(cholesky_parameters(mixed)), options, options.max_iterations - used);
    used += again.iterations;
    if (again.f < best.f) best = std::move(again);
  }

  TomographyResult out(density_from_parameters(best.x), TomographyMethod::mle);
  out.log_likelihood = -best.f * obj.total;
  // Report the Poisson log-likelihood at the fitted intensity: sum n log mu - mu.
  {
    LikelihoodTerms lt = terms(lower_from_parameters(best.x));
    const double intensity = obj.total / lt.sum_p;
    double l = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
      double mu = std::max(intensity * lt.p[k], kProbabilityFloor);
      l += (obj.n[k] > 0.0 ? obj.n[k] * std::log(mu) : 0.0) - mu;
    }
    out.log_likelihood = l;
  }
  out.fidelity_to_ideal = fidelity(ideal, out.rho);
  out.fidelity_std = std::numeric_limits<double>::quiet_NaN();
  out.converged = best.converged;
  out.iterations = used;
  out.log_likelihood_trace = std::move(best.trace);
  return out;
}

TomographyResult reconstruct(const CountTable16& table, TomographyMethod method, const DensityMatrix& ideal) {
  return method == TomographyMethod::linear ? tomo_linear(table, ideal) : tomo_mle(table, {}, ideal);
}

ChshAngles standard_chsh_angles() {
  using std::numbers::pi;
  return {0.0, pi / 4.0, pi / 8.0, 3.0 * pi / 8.0};
}

void ChshCounts::validate() const {
  check_counts(flat(), "CHSH");
  for (double v : {angles.a, angles.a_prime, angles.b, angles.b_prime}) {
    if (!std::isfinite(v)) throw InvalidArgument("CHSH angles must be finite");
  }
}

std::vector<double> ChshCounts::flat() const {
  std::vector<double> v;
  for (const auto& row : counts) v.insert(v.end(), row.begin(), row.end());
  return v;
}

std::array<double, 4> ChshCounts::signal2_angles(const ChshAngles& a) {
  using std::numbers::pi;
  return {a.a, a.a + pi / 2.0, a.a_prime, a.a_prime + pi / 2.0};
}

std::array<double, 4> ChshCounts::signal1_angles(const ChshAngles& a) {
  using std::numbers::pi;
  return {a.b, a.b + pi / 2.0, a.b_prime, a.b_prime + pi / 2.0};
}

std::vector<optics::MeasurementSetting> chsh_settings(const ChshAngles& angles, optics::Conjugation conj_signal2,
                                                      optics::Conjugation conj_signal1) {
  std::vector<optics::MeasurementSetting> out;
  for (double ta : ChshCounts::signal2_angles(angles)) {
    for (double tb : ChshCounts::signal1_angles(angles)) {
      out.push_back(optics::sector_setting(optics::SectorAngle(ta), optics::SectorAngle(tb), conj_signal2, conj_signal1));
    }
  }
  return out;
}

ChshCounts chsh_from_flat(const ChshAngles& angles, std::span<const double> values) {
  if (values.size() != 16) throw InvalidArgument("CHSH counts have 16 entries");
  ChshCounts c;
  c.angles = angles;
  for (std::size_t k = 0; k < 16; ++k) c.counts[k / 4][k % 4] = values[k];
  c.validate();
  return c;
}

double chsh_E(double c_ab, double c_aperp_bperp, double c_aperp_b, double c_a_bperp) {
  const double sum = c_ab + c_aperp_bperp + c_aperp_b + c_a_bperp;
  if (!(sum > 0.0)) throw EstimatorFailure("CHSH correlation has a zero denominator");
  return (c_ab + c_aperp_bperp - c_aperp_b - c_a_bperp) / sum;
}

double chsh_S(double e_ab, double e_abp, double e_apb, double e_apbp) {
  return e_ab - e_abp + e_apb + e_apbp;
}

double chsh_S(const ChshCounts& c) {
  c.validate();
  auto E = [&](int i, int j) {
    const auto& n = c.counts;
    return chsh_E(n[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                  n[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)],
                  n[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)],
                  n[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)]);
  };
  return chsh_S(E(0, 0), E(0, 2), E(2, 0), E(2, 2));
}

VisibilityFit visibility_fit(std::span<const std::pair<double, double>> samples) {
  using std::numbers::pi;
  std::vector<double> reduced;
  for (const auto& [theta, rate] : samples) {
    if (!std::isfinite(theta) || !std::isfinite(rate)) throw InvalidArgument("visibility samples must be finite");
    double r = std::fmod(theta, pi);
    if (r < 0) r += pi;
    reduced.push_back(r);
  }
  std::sort(reduced.begin(), reduced.end());
  std::size_t distinct = reduced.empty() ? 0 : 1;
  for (std::size_t i = 1; i < reduced.size(); ++i) {
    if (reduced[i] - reduced[i - 1] > 1e-12) ++distinct;
  }
  if (distinct > 1 && reduced.back() - reduced.front() > pi - 1e-12) --distinct;
  if (distinct < 4) throw InvalidArgument("visibility fit needs at least 4 distinct theta_b values (mod pi)");

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = samples[static_cast<std::size_t>(i)].first;
    X(i, 0) = 1.0;
    X(i, 1) = std::cos(2.0 * t);
    X(i, 2) = std::sin(2.0 * t);
    y(i) = samples[static_cast<std::size_t>(i)].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 3) throw InvalidArgument("visibility samples are degenerate");
  Eigen::Vector3d c = qr.solve(y);
  if (!(c(0) > 0.0)) throw EstimatorFailure("visibility fit has a non-positive offset");
  const double amp = std::hypot(c(1), c(2));

  VisibilityFit out;
  out.offset = c(0);
  out.visibility = std::clamp(amp / c(0), 0.0, 1.0);
  double phase = 0.5 * std::atan2(c(2), c(1));
  if (phase < 0) phase += pi;
  out.phase_rad = phase;

  const double dof = static_cast<double>(n - 3);
  const double sigma2 = dof > 0 ? (y - X * c).squaredNorm() / dof : 0.0;
  Eigen::Matrix3d cov = sigma2 * (X.transpose() * X).inverse();
  Eigen::Vector3d grad;
  grad(0) = -amp / (c(0) * c(0));
  grad(1) = amp > 0 ? c(1) / (c(0) * amp) : 0.0;
  grad(2) = amp > 0 ? c(2) / (c(0) * amp) : 0.0;
  out.std_error = std::sqrt(std::max(grad.dot(cov * grad), 0.0));
  return out;
}

ExponentialFit fit_exponential(std::span<const std::pair<double, double>> samples) {
  std::vector<std::pair<double, double>> s(samples.begin(), samples.end());
  for (const auto& [tau, eff] : s) {
    if (!std::isfinite(tau) || !std::isfinite(eff)) throw InvalidArgument("efficiency samples must be finite");
  }
  std::sort(s.begin(), s.end());
  std::set<double> taus;
  for (const auto& p : s) taus.insert(p.first);
  if (s.size() < 4 || taus.size() < 4) throw InvalidArgument("exponential fit needs at least 4 distinct delays");

  const double tau0 = s.front().first;
  const double span = s.back().first - tau0;

  struct Linear {
    double g0, amplitude, rss;
  };
  auto solve = [&](double decay) {
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    const double n = static_cast<double>(s.size());
    for (const auto& [tau, eff] : s) {
      double x = std::exp(-(tau - tau0) / decay);
      sx += x;
      sxx += x * x;
      sy += eff;
      sxy += x * eff;
    }
    double det = n * sxx - sx * sx;
    Linear l{sy / n, 0.0, 0.0};
    if (det > 1e-14 * n * sxx) {
      double a = (n * sxy - sx * sy) / det;
      if (a > 0.0) l = {(sy - a * sx) / n, a, 0.0};
    }
    for (const auto& [tau, eff] : s) {
      double r = eff - l.g0 - l.amplitude * std::exp(-(tau - tau0) / decay);
      l.rss += r * r;
    }
    return l;
  };

  const double lo = std::log(span / 1000.0);
  const double hi = std::log(span * 1000.0);
  constexpr int kGrid = 400;
  int best = 0;
  double best_rss = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    double u = lo + (hi - lo) * k / kGrid;
    double rss = solve(std::exp(u)).rss;
    if (rss < best_rss) {
      best_rss = rss;
      best = k;
    }
  }
  const double step = (hi - lo) / kGrid;
  const double a = lo + step * std::max(best - 1, 0);
  const double b = lo + step * std::min(best + 1, kGrid);
  auto [u, rss] = boost::math::tools::brent_find_minima([&](double v) { return solve(std::exp(v)).rss; }, a, b,
                                                        std::numeric_limits<double>::digits / 2);
  (void)rss;
  const double decay = std::exp(u);
  Linear l = solve(decay);
  const double scale = std::max(1e-300, std::abs(l.g0) + l.amplitude);
  if ((best == 0 || best == kGrid) && l.amplitude > 1e-9 * scale) {
    throw EstimatorFailure("decay time is not identified by the samples (optimum at the search boundary)");
  }
  if (!std::isfinite(l.g0) || !std::isfinite(l.amplitude)) throw EstimatorFailure("exponential fit did not converge");

  ExponentialFit out;
  out.fit = {l.g0, l.amplitude, tau0, decay};
  out.residual_norm = std::sqrt(l.rss);
  return out;
}

double montecarlo_std(std::span<const double> counts, const Estimator& estimator, int n_resamples,
                      std::uint64_t seed) {
  if (n_resamples < 100) throw InvalidArgument("Monte Carlo errors need at least 100 resamples");
  check_counts(counts, "Monte Carlo");
  std::vector<double> values(static_cast<std::size_t>(n_resamples));
  std::vector<std::exception_ptr> errors(values.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> draw(counts.size());
    for (std::size_t r = begin; r < end; ++r) {
      try {
        random::Engine rng(seed, random::Stream::resample, r);
        for (std::size_t i = 0; i < counts.size(); ++i) {
          draw[i] = counts[i] > 0.0 ? static_cast<double>(std::poisson_distribution<std::int64_t>(counts[i])(rng)) : 0.0;
        }
        values[r] = estimator(draw);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, values.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back(work, values.size() * w / workers, values.size() * (w + 1) / workers);
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size() - 1));
}

}  // namespace oamstore::analysis
