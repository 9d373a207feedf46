#pragma once

// Dense complex operator algebra: polar decomposition, spectral functions of
// Hermitian matrices, the W = (V^H V)^{-1} weight, Kronecker products and the
// partial trace over site indices.
//
// Kronecker convention is (site (x) internal): element ((i,a),(k,b)) of
// A (x) B is A(i,k) * B(a,b), so row index i * n + a.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "lindbladlab/types.hpp"

namespace lindblad {

template <typename Real>
Matrix<Real> identity(Index d) {
  return Matrix<Real>::Identity(d, d);
}

template <typename Real>
Matrix<Real> hermitize(const Matrix<Real>& m) {
  return (m + m.adjoint()) * Real(0.5);
}

template <typename Real>
Matrix<Real> commutator(const Matrix<Real>& a, const Matrix<Real>& b) {
  return a * b - b * a;
}

template <typename Real>
Matrix<Real> anticommutator(const Matrix<Real>& a, const Matrix<Real>& b) {
  return a * b + b * a;
}

/// ||[A, B]||_F relative to max(1, ||A||_F ||B||_F).
template <typename Real>
Real commutation_defect(const Matrix<Real>& a, const Matrix<Real>& b) {
  return commutator(a, b).norm() / std::max(Real(1), a.norm() * b.norm());
}

/// sigma_min / sigma_max of a square matrix.
template <typename Real>
Real inverse_condition(const Matrix<Real>& v) {
  Eigen::JacobiSVD<Matrix<Real>> svd(v);
  const auto& s = svd.singularValues();
  if (s(0) == Real(0)) return Real(0);
  return s(s.size() - 1) / s(0);
}

template <typename Real>
bool is_invertible(const Matrix<Real>& v, const Tolerances& tol = {}) {
  return inverse_condition(v) > Real(tol.invertibility);
}

template <typename Real>
void require_invertible(const Matrix<Real>& v, const Tolerances& tol, const char* what) {
  if (!is_invertible(v, tol))
    raise(ErrorCode::SingularInput, std::string(what) + " has a numerical zero-mode");
}

template <typename Real>
struct PolarFactors {
  Unitary<Real> unitary;
  Positive<Real> positive;
};

/// V = U P with U unitary and P = sqrt(V^H V), by the scaled Newton iteration
/// X <- (g X + X^{-H} / g) / 2. Requires V invertible.
template <typename Real>
PolarFactors<Real> polar_decompose(const Matrix<Real>& v, const Tolerances& tol = {}) {
  require_square(v, "V");
  require_finite(v, "V");
  require_invertible(v, tol, "V");

  const Real eps = std::numeric_limits<Real>::epsilon();
  Matrix<Real> x = v;
  bool scaling = true;
  bool converged = false;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    const Matrix<Real> inv_h = x.partialPivLu().inverse().adjoint();
    Real gamma = 1;
    if (scaling) gamma = std::sqrt(inv_h.norm() / x.norm());
    Matrix<Real> next = (gamma * x + inv_h / gamma) * Real(0.5);
    const Real delta = (next - x).norm() / next.norm();
    x = std::move(next);
    if (delta < Real(1e-2)) scaling = false;
    // Quadratic convergence: once delta is below sqrt(eps) one more step lands at eps.
    if (delta < std::sqrt(eps)) {
      const Matrix<Real> last = (x + x.partialPivLu().inverse().adjoint()) * Real(0.5);
      x = last;
      converged = true;
    }
  }
  if (!converged) raise(ErrorCode::NonConvergent, "polar iteration did not converge");

  Matrix<Real> p = hermitize<Real>(x.adjoint() * v);
  return {Unitary<Real>(std::move(x), tol), Positive<Real>(std::move(p), tol)};
}

/// Tag for the scalar function applied to the spectrum of a Hermitian matrix.
struct ScalarFunction {
  enum class Kind { Exp, Inverse, Power, Bose };
  Kind kind = Kind::Exp;
  double exponent = 1.0;  // Power only

  static ScalarFunction exp() { return {Kind::Exp, 1.0}; }
  static ScalarFunction inverse() { return {Kind::Inverse, -1.0}; }
  static ScalarFunction power(double k) { return {Kind::Power, k}; }
  /// x -> 1 / (e^x - 1)
  static ScalarFunction bose() { return {Kind::Bose, 1.0}; }
};

/// Q diag(f(lambda)) Q^H for H = Q diag(lambda) Q^H.
template <typename Real, typename F>
Matrix<Real> spectral_map(const Hermitian<Real>& h, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(h.matrix());
  const Matrix<Real>& q = es.eigenvectors();
  const auto& lambda = es.eigenvalues();
  Vector<Real> mapped(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) mapped(i) = Complex<Real>(f(lambda(i)), Real(0));
  return hermitize<Real>(q * mapped.asDiagonal() * q.adjoint());
}

template <typename Real>
Hermitian<Real> hermitian_function(const Hermitian<Real>& h, ScalarFunction f, const Tolerances& tol = {}) {
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(h.matrix(), Eigen::EigenvaluesOnly);
  const auto& lambda = es.eigenvalues();
  const Real singular = Real(tol.singular_point);
  const Real scale = std::max(std::abs(lambda(0)), std::abs(lambda(lambda.size() - 1)));

  using Kind = ScalarFunction::Kind;
  switch (f.kind) {
    case Kind::Exp:
      return Hermitian<Real>(spectral_map(h, [](Real x) { return std::exp(x); }), tol);
    case Kind::Inverse:
      for (Index i = 0; i < lambda.size(); ++i)
        if (std::abs(lambda(i)) <= singular)
          raise(ErrorCode::SpectrumAtSingularity, "eigenvalue at 0 for inverse");
      return Hermitian<Real>(spectral_map(h, [](Real x) { return Real(1) / x; }), tol);
    case Kind::Bose:
      for (Index i = 0; i < lambda.size(); ++i)
        if (std::abs(lambda(i)) <= singular)
          raise(ErrorCode::SpectrumAtSingularity, "eigenvalue at 0 for 1/(e^x - 1)");
      return Hermitian<Real>(spectral_map(h, [](Real x) { return Real(1) / std::expm1(x); }), tol);
    case Kind::Power: {
      const Real k = Real(f.exponent);
      const bool integral = k == std::floor(k);
      for (Index i = 0; i < lambda.size(); ++i) {
        if (k < 0 && std::abs(lambda(i)) <= singular)
          raise(ErrorCode::SpectrumAtSingularity, "eigenvalue at 0 for negative power");
        if (!integral && lambda(i) < -Real(tol.positive) * scale)
          raise(ErrorCode::NotPositive, "fractional power of a matrix with negative spectrum");
      }
      return Hermitian<Real>(spectral_map(h,
                                          [k, integral](Real x) {
                                            if (!integral) x = std::max(x, Real(0));
                                            return std::pow(x, k);
                                          }),
                             tol);
    }
  }
  raise(ErrorCode::InvalidArgument, "unknown scalar function");
}

/// Principal square root of a positive semidefinite matrix.
template <typename Real>
Positive<Real> psd_sqrt(const Positive<Real>& p, const Tolerances& tol = {}) {
  return Positive<Real>(spectral_map(p.hermitian(), [](Real x) { return std::sqrt(std::max(x, Real(0))); }),
                        tol);
}

/// e^A by scaling and squaring with Pade approximants.
template <typename Real>
Matrix<Real> matrix_exp(const Matrix<Real>& a) {
  require_square(a, "exponent");
  require_finite(a, "exponent");
  return a.exp();
}

/// W = (V^H V)^{-1}.
template <typename Real>
Positive<Real> build_W(const Matrix<Real>& v, const Tolerances& tol = {}) {
  require_square(v, "V");
  require_finite(v, "V");
  require_invertible(v, tol, "V");
  const Matrix<Real> inv = v.partialPivLu().inverse();
  return Positive<Real>(hermitize<Real>(inv * inv.adjoint()), tol);
}

/// V = U W^{-1/2}; inverts build_W for a chosen unitary factor.
template <typename Real>
Matrix<Real> build_V_from_W(const Positive<Real>& w, const Unitary<Real>& u, const Tolerances& tol = {}) {
  if (w.dim() != u.dim()) raise(ErrorCode::DimensionMismatch, "W and U differ in dimension");
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(w.matrix(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev(0) <= Real(tol.invertibility) * ev(ev.size() - 1))
    raise(ErrorCode::NotPositive, "W must be positive definite");
  return u.matrix() * hermitian_function(w.hermitian(), ScalarFunction::power(-0.5), tol).matrix();
}

template <typename Real>
Matrix<Real> tensor_product(const Matrix<Real>& a, const Matrix<Real>& b) {
  Matrix<Real> out = Eigen::kroneckerProduct(a, b);
  return out;
}

/// Sum of the m diagonal n x n blocks of an (m n) x (m n) matrix.
template <typename Real>
Matrix<Real> partial_trace_sites(const Matrix<Real>& x, Index m, Index n) {
  if (m <= 0 || n <= 0 || x.rows() != m * n || x.cols() != m * n)
    raise(ErrorCode::DimensionMismatch, "partial trace: matrix dimension is not m * n");
  Matrix<Real> out = Matrix<Real>::Zero(n, n);
  for (Index i = 0; i < m; ++i) out += x.block(i * n, i * n, n, n);
  return out;
}

/// Trace over the internal factor, leaving the m x m site operator.
template <typename Real>
Matrix<Real> partial_trace_internal(const Matrix<Real>& x, Index m, Index n) {
  if (m <= 0 || n <= 0 || x.rows() != m * n || x.cols() != m * n)
    raise(ErrorCode::DimensionMismatch, "partial trace: matrix dimension is not m * n");
  Matrix<Real> out(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k) out(i, k) = x.block(i * n, k * n, n, n).trace();
  return out;
}

template <typename Real>
Matrix<Real> direct_sum(const Matrix<Real>& a, const Matrix<Real>& b) {
  Matrix<Real> out = Matrix<Real>::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace lindblad
