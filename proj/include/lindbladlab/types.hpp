#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "lindbladlab/error.hpp"

namespace lindblad {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using Matrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using Vector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Index = Eigen::Index;
using cdouble = Complex<double>;
using ComplexMatrix = Matrix<double>;
using ComplexVector = Vector<double>;

/// Numerical thresholds shared by every module. All are relative unless
/// stated otherwise.
struct Tolerances {
  double invertibility = 1e-12;  // sigma_min / sigma_max cutoff
  double hermitian = 1e-12;
  double unitary = 1e-12;        // scaled by dimension
  double positive = 1e-12;       // scaled by ||M||_2
  double trace = 1e-10;          // absolute, for unit trace
  double commutation = 1e-10;
  double kernel = 1e-10;         // scaled by ||L||_2
  double singular_point = 1e-12; // distance of the spectrum from a pole
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const auto& z = m(i, j);
      if (!std::isfinite(std::real(z)) || !std::isfinite(std::imag(z))) return false;
    }
  return true;
}

template <typename Real>
void require_finite(const Matrix<Real>& m, const char* what) {
  if (!all_finite(m)) raise(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

template <typename Real>
void require_square(const Matrix<Real>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    raise(ErrorCode::DimensionMismatch, std::string(what) + " must be a non-empty square matrix");
}

/// Relative distance from Hermiticity: ||M - M^H||_F / max(1, ||M||_F).
template <typename Real>
Real hermiticity_defect(const Matrix<Real>& m) {
  return (m - m.adjoint()).norm() / std::max(Real(1), m.norm());
}

/// Square matrix with M = M^H.
template <typename Real>
class Hermitian {
 public:
  explicit Hermitian(Matrix<Real> m, const Tolerances& tol = {}) : m_(std::move(m)) {
    require_square(m_, "Hermitian matrix");
    require_finite(m_, "Hermitian matrix");
    if (hermiticity_defect(m_) > tol.hermitian)
      raise(ErrorCode::InvariantViolation, "matrix is not Hermitian");
  }

  const Matrix<Real>& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

 private:
  Matrix<Real> m_;
};

/// Square matrix with U^H U = I.
template <typename Real>
class Unitary {
 public:
  explicit Unitary(Matrix<Real> m, const Tolerances& tol = {}) : m_(std::move(m)) {
    require_square(m_, "unitary matrix");
    require_finite(m_, "unitary matrix");
    const Index d = m_.rows();
    const Real defect = (m_.adjoint() * m_ - Matrix<Real>::Identity(d, d)).norm();
    if (defect > tol.unitary * Real(d)) raise(ErrorCode::InvariantViolation, "matrix is not unitary");
  }

  const Matrix<Real>& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

 private:
  Matrix<Real> m_;
};

/// Hermitian matrix with no eigenvalue below -tol * ||M||_2.
template <typename Real>
class Positive {
 public:
  explicit Positive(Matrix<Real> m, const Tolerances& tol = {}) : h_(std::move(m), tol) {
    Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(h_.matrix(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const Real scale = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    if (ev(0) < -tol.positive * scale)
      raise(ErrorCode::NotPositive, "matrix has a negative eigenvalue");
  }

  explicit Positive(const Hermitian<Real>& h, const Tolerances& tol = {}) : Positive(h.matrix(), tol) {}

  const Matrix<Real>& matrix() const noexcept { return h_.matrix(); }
  const Hermitian<Real>& hermitian() const noexcept { return h_; }
  Index dim() const noexcept { return h_.dim(); }

 private:
  Hermitian<Real> h_;
};

/// Positive matrix with unit trace.
template <typename Real>
class Density {
 public:
  explicit Density(Matrix<Real> m, const Tolerances& tol = {}) : p_(std::move(m), tol) {
    if (std::abs(p_.matrix().trace() - Complex<Real>(1)) > tol.trace)
      raise(ErrorCode::InvariantViolation, "density matrix must have unit trace");
  }

  const Matrix<Real>& matrix() const noexcept { return p_.matrix(); }
  const Positive<Real>& positive() const noexcept { return p_; }
  Index dim() const noexcept { return p_.dim(); }

 private:
  Positive<Real> p_;
};

using HermitianMatrix = Hermitian<double>;
using UnitaryMatrix = Unitary<double>;
using PositiveMatrix = Positive<double>;
using DensityMatrix = Density<double>;

}  // namespace lindblad
