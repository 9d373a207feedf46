#include "lindbladlab/bose.hpp"

#include <cmath>
#include <limits>

namespace lindblad {

BoseModel::BoseModel(HermitianMatrix hamiltonian, double beta)
    : hamiltonian_(std::move(hamiltonian)), beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) raise(ErrorCode::InvalidArgument, "beta must be positive");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hamiltonian_.matrix(), Eigen::EigenvaluesOnly);
  if (beta * es.eigenvalues()(0) < 1e-8)
    raise(ErrorCode::SpectrumAtSingularity, "beta H must have a strictly positive spectrum");
}

PositiveMatrix BoseModel::lindblad_root() const {
  return PositiveMatrix(hermitian_function(HermitianMatrix(-0.5 * beta_ * hamiltonian_.matrix()), ScalarFunction::exp())
                            .matrix());
}

namespace {

ComplexMatrix weight(const PositiveMatrix& v) { return hermitize<double>(v.matrix().adjoint() * v.matrix()); }

double spectral_radius(const ComplexMatrix& x) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(es.eigenvalues().size() - 1)));
}

void require_contracting(const ComplexMatrix& x) {
  if (!(spectral_radius(x) < 1.0)) raise(ErrorCode::Divergent, "spectral radius of V^H V is not below 1");
}

}  // namespace

PositiveMatrix geometric_W(const PositiveMatrix& v, int terms) {
  if (terms < 0) raise(ErrorCode::InvalidArgument, "number of terms must be non-negative");
  const ComplexMatrix x = weight(v);
  ComplexMatrix power = identity<double>(v.dim());
  ComplexMatrix sum = ComplexMatrix::Zero(v.dim(), v.dim());
  for (int j = 1; j <= terms; ++j) {
    power = power * x;
    sum += power;
  }
  return PositiveMatrix(hermitize<double>(sum));
}

PositiveMatrix geometric_W_infinite(const PositiveMatrix& v) {
  const ComplexMatrix x = weight(v);
  require_contracting(x);
  const ComplexMatrix complement = identity<double>(v.dim()) - x;
  // x commutes with (I - x), so x (I - x)^{-1} = (I - x)^{-1} x.
  return PositiveMatrix(hermitize<double>(complement.partialPivLu().solve(x)));
}

PositiveMatrix fock_bose_W(const PositiveMatrix& v) {
  const ComplexMatrix x = weight(v);
  require_contracting(x);
  const HermitianMatrix w_h = hermitian_function(HermitianMatrix(x), ScalarFunction::inverse());
  const HermitianMatrix shifted(w_h.matrix() - identity<double>(v.dim()));
  return PositiveMatrix(hermitian_function(shifted, ScalarFunction::inverse()).matrix());
}

PositiveMatrix bose_distribution(const BoseModel& model) {
  const HermitianMatrix scaled(model.beta() * model.hamiltonian().matrix());
  return PositiveMatrix(hermitian_function(scaled, ScalarFunction::bose()).matrix());
}

double nbar(const BoseModel& model) { return bose_distribution(model).matrix().trace().real(); }

cdouble bose_expectation(const ComplexMatrix& b, const BoseModel& model, bool normalized) {
  if (b.rows() != model.dim() || b.cols() != model.dim()) raise(ErrorCode::DimensionMismatch, "observable dimension");
  const ComplexMatrix n = bose_distribution(model).matrix();
  const cdouble raw = (b * n).trace();
  return normalized ? raw / n.trace().real() : raw;
}

std::string_view to_string(FockPath p) {
  switch (p) {
    case FockPath::Auto: return "auto";
    case FockPath::Dense: return "dense";
    case FockPath::Occupation: return "occupation";
  }
  return "auto";
}

ComplexVector apply_on_factor(const ComplexMatrix& a, const ComplexVector& psi, int factor, int j) {
  const Index d = a.rows();
  Index inner = 1;
  for (int k = factor + 1; k < j; ++k) inner *= d;
  const Index outer = psi.size() / (inner * d);
  ComplexVector out = ComplexVector::Zero(psi.size());
  for (Index o = 0; o < outer; ++o)
    for (Index r = 0; r < d; ++r)
      for (Index c = 0; c < d; ++c) {
        const cdouble coeff = a(r, c);
        if (coeff == cdouble(0)) continue;
        out.segment((o * d + r) * inner, inner) += coeff * psi.segment((o * d + c) * inner, inner);
      }
  return out;
}

namespace {

// Upper bound on sum_{J > j_max} J^power C(J) r^J, C(J) = binomial(J + d - 1, d - 1).
double geometric_tail(int d, int j_max, double r, int power) {
  if (r <= 0.0) return 0.0;
  const double log_r = std::log(r);
  double sum = 0.0;
  for (long j = j_max + 1;; ++j) {
    const double jd = static_cast<double>(j);
    const double log_term = std::lgamma(jd + d) - std::lgamma(jd + 1.0) - std::lgamma(static_cast<double>(d)) +
                            jd * log_r + power * std::log(jd);
    const double term = std::exp(log_term);
    sum += term;
    // Terms decrease geometrically past the peak of J^p C(J) r^J.
    const double ratio = r * (jd + d) / (jd + 1.0) * std::pow((jd + 1.0) / jd, power);
    if (ratio < 1.0 && term <= sum * 1e-17) {
      sum += term * ratio / (1.0 - ratio);
      break;
    }
    if (j > j_max + 10'000'000L) return std::numeric_limits<double>::infinity();
  }
  return sum;
}

struct SectorSums {
  std::vector<cdouble> numerators;
  std::vector<double> traces;
};

SectorSums occupation_sectors(const RealVector<double>& x, const ComplexVector& b_diag, int j_max) {
  // Adding one mode at a time: z'_J = z_J + x z'_{J-1},  w'_J = w_J + x (w'_{J-1} + b z'_{J-1}).
  std::vector<double> z(static_cast<std::size_t>(j_max) + 1, 0.0);
  std::vector<cdouble> w(static_cast<std::size_t>(j_max) + 1, 0.0);
  z[0] = 1.0;
  for (Index i = 0; i < x.size(); ++i) {
    for (int jj = 1; jj <= j_max; ++jj) {
      const auto J = static_cast<std::size_t>(jj);
      w[J] = w[J] + x(i) * (w[J - 1] + b_diag(i) * z[J - 1]);
      z[J] = z[J] + x(i) * z[J - 1];
    }
  }
  return {std::move(w), std::move(z)};
}

SectorSums dense_sectors(const ComplexMatrix& b, const ComplexMatrix& x, int j_max, std::size_t cap) {
  const int d = static_cast<int>(b.rows());
  SectorSums sums;
  for (int j = 0; j <= j_max; ++j) {
    const OccupationBasis basis(d, j, cap);
    const ComplexMatrix& iso = basis.isometry();
    cdouble numerator = 0.0;
    cdouble trace = 0.0;
    for (Index s = 0; s < iso.cols(); ++s) {
      const ComplexVector psi = iso.col(s);
      ComplexVector phi = psi;
      for (int k = 0; k < j; ++k) phi = apply_on_factor(x, phi, k, j);
      trace += psi.dot(phi);
      for (int k = 0; k < j; ++k) numerator += psi.dot(apply_on_factor(b, phi, k, j));
    }
    sums.numerators.push_back(numerator);
    sums.traces.push_back(trace.real());
  }
  return sums;
}

}  // namespace

BoseReport fock_expectation(const ComplexMatrix& b, const BoseModel& model, int j_max, const FockOptions& options) {
  const Index d = model.dim();
  if (b.rows() != d || b.cols() != d) raise(ErrorCode::DimensionMismatch, "observable dimension");
  if (j_max < 0) raise(ErrorCode::InvalidArgument, "J_max must be non-negative");

  const ComplexMatrix x = weight(model.lindblad_root());
  require_contracting(x);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.hamiltonian().matrix());
  const ComplexMatrix& q = es.eigenvectors();
  const ComplexMatrix b_eigen = q.adjoint() * b * q;
  const ComplexMatrix off = b_eigen - ComplexMatrix(b_eigen.diagonal().asDiagonal());
  const bool diagonal = off.norm() <= 1e-12 * std::max(1.0, b.norm());

  FockPath path = options.path;
  if (path == FockPath::Auto) path = diagonal ? FockPath::Occupation : FockPath::Dense;
  if (path == FockPath::Occupation && !diagonal)
    raise(ErrorCode::InvalidArgument, "occupation path needs B diagonal in the eigenbasis of H");
  if (path == FockPath::Occupation && j_max > options.occupation_max)
    raise(ErrorCode::CapExceeded, "J_max exceeds the occupation-path limit");
  if (path == FockPath::Dense && product_dimension(static_cast<int>(d), j_max, options.dense_cap) > options.dense_cap)
    raise(ErrorCode::CapExceeded, "d^J_max exceeds the dense cap");

  SectorSums sums;
  if (path == FockPath::Occupation) {
    RealVector<double> weights = (-model.beta() * es.eigenvalues().array()).exp().matrix();
    sums = occupation_sectors(weights, b_eigen.diagonal(), j_max);
  } else {
    sums = dense_sectors(b, x, j_max, options.dense_cap);
  }

  BoseReport report;
  report.path = path;
  report.j_max = j_max;
  report.sector_numerators = sums.numerators;
  report.sector_traces = sums.traces;
  cdouble numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t j = options.include_vacuum ? 0 : 1; j < sums.traces.size(); ++j) {
    numerator += sums.numerators[j];
    denominator += sums.traces[j];
  }
  if (!(denominator > 0.0)) raise(ErrorCode::InvalidArgument, "empty Fock truncation");
  report.fock_ratio = numerator / denominator;
  report.analytic_expectation = bose_expectation(b, model, false);
  report.nbar = nbar(model);

  const double r = spectral_radius(x);
  const double b_norm = b.jacobiSvd().singularValues()(0);
  const double tail_z = geometric_tail(static_cast<int>(d), j_max, r, 0);
  const double tail_n = b_norm * geometric_tail(static_cast<int>(d), j_max, r, 1);
  report.tail_bound = (tail_n + std::abs(report.fock_ratio) * tail_z) / denominator;
  return report;
}

ClusterCheck cluster_check(const ComplexMatrix& b, const BoseModel& model, int j_max, const FockOptions& options) {
  ClusterCheck check;
  check.report = fock_expectation(b, model, j_max, options);
  const double scale = std::abs(check.report.analytic_expectation);
  const double norm = scale > 0.0 ? scale : 1.0;
  check.residual = std::abs(check.report.fock_ratio - check.report.analytic_expectation) / norm;
  check.relative_tail_bound = check.report.tail_bound / norm;
  return check;
}

}  // namespace lindblad
