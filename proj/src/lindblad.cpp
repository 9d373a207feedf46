#include "lindbladlab/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace lindblad {

LindbladModel::LindbladModel(HermitianMatrix hamiltonian, std::vector<ComplexMatrix> lindblad_ops,
                             const Tolerances& tol)
    : hamiltonian_(std::move(hamiltonian)), ops_(std::move(lindblad_ops)) {
  if (ops_.empty()) raise(ErrorCode::InvalidArgument, "a Lindblad model needs at least one Lindblad operator");
  for (std::size_t j = 0; j < ops_.size(); ++j) {
    const auto& v = ops_[j];
    if (v.rows() != dim() || v.cols() != dim())
      raise(ErrorCode::DimensionMismatch, "Lindblad operator " + std::to_string(j) + " has the wrong dimension");
    require_finite(v, "Lindblad operator");
    if (!is_invertible(v, tol)) warnings_.push_back("Lindblad operator " + std::to_string(j) + " is not invertible");
  }
}

std::string_view to_string(Picture p) { return p == Picture::Heisenberg ? "heisenberg" : "schrodinger"; }

std::string_view to_string(Method m) { return m == Method::Exponential ? "exponential" : "ode"; }

ComplexVector vectorize(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, Index d) {
  if (v.size() != d * d) raise(ErrorCode::DimensionMismatch, "vector length is not d^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& x) const {
  if (x.rows() != dim || x.cols() != dim) raise(ErrorCode::DimensionMismatch, "operand dimension");
  return unvectorize(matrix * vectorize(x), dim);
}

namespace {

Superoperator build_generator(const LindbladModel& model, Picture picture) {
  const Index d = model.dim();
  const ComplexMatrix id = identity<double>(d);
  const ComplexMatrix& h = model.hamiltonian().matrix();
  const cdouble i_sign = picture == Picture::Heisenberg ? cdouble(0, 1) : cdouble(0, -1);

  ComplexMatrix l = i_sign * (tensor_product<double>(id, h) - tensor_product<double>(h.transpose(), id));
  for (const auto& v : model.lindblad_ops()) {
    const ComplexMatrix k = v.adjoint() * v;
    if (picture == Picture::Heisenberg)
      l += tensor_product<double>(v.transpose(), v.adjoint());
    else
      l += tensor_product<double>(v.conjugate(), v);
    l -= 0.5 * (tensor_product<double>(id, k) + tensor_product<double>(k.transpose(), id));
  }
  return {picture, d, std::move(l)};
}

}  // namespace

Superoperator heisenberg_generator(const LindbladModel& model) { return build_generator(model, Picture::Heisenberg); }

Superoperator schrodinger_generator(const LindbladModel& model) {
  return build_generator(model, Picture::Schrodinger);
}

void require_time_grid(const std::vector<double>& times) {
  if (times.empty()) raise(ErrorCode::InvalidArgument, "empty time grid");
  if (times.front() != 0.0) raise(ErrorCode::InvalidArgument, "time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || !(times[k] > times[k - 1]))
      raise(ErrorCode::InvalidArgument, "time grid must be strictly increasing");
  }
}

std::vector<double> uniform_grid(double t_max, std::size_t steps) {
  if (!(t_max >= 0.0)) raise(ErrorCode::InvalidArgument, "t_max must be non-negative");
  if (t_max == 0.0 || steps == 0) return {0.0};
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = t_max * static_cast<double>(k) / static_cast<double>(steps);
  return grid;
}

namespace {

struct ExponentialStepper {
  const ComplexMatrix& l;
  double norm1;
  double cap;
  double cached_dt = -1.0;
  long substeps = 0;
  ComplexMatrix propagator;

  ExponentialStepper(const ComplexMatrix& gen, double cap_)
      : l(gen), norm1(gen.cwiseAbs().colwise().sum().maxCoeff()), cap(cap_) {}

  void advance(ComplexVector& y, double dt) {
    // grid spacings differ from the cached step only by rounding
    if (std::abs(dt - cached_dt) > 1e-9 * std::abs(dt)) {
      substeps = std::max(1L, static_cast<long>(std::ceil(norm1 * dt / cap)));
      propagator = matrix_exp<double>(l * (dt / static_cast<double>(substeps)));
      cached_dt = dt;
    }
    for (long s = 0; s < substeps; ++s) y = propagator * y;
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                                   -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct DormandPrince {
  const ComplexMatrix& l;
  double rtol;
  double atol;
  std::size_t max_steps;
  std::size_t steps_taken = 0;
  double h;

  DormandPrince(const ComplexMatrix& gen, double rtol_, double atol_, std::size_t max_steps_)
      : l(gen), rtol(rtol_), atol(atol_), max_steps(max_steps_) {
    const double norm1 = gen.cwiseAbs().colwise().sum().maxCoeff();
    h = norm1 > 0 ? 0.01 / norm1 : 1.0;
  }

  void advance(ComplexVector& y, double t0, double t1) {
    std::array<ComplexVector, 7> k;
    double t = t0;
    while (t < t1) {
      if (++steps_taken > max_steps) raise(ErrorCode::StepFailure, "ODE step budget exhausted");
      bool last = false;
      double step = h;
      if (t + step >= t1) {
        step = t1 - t;
        last = true;
      }
      if (step <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        raise(ErrorCode::StepFailure, "ODE step size underflow");

      k[0] = l * y;
      for (int s = 1; s < 7; ++s) {
        ComplexVector stage = y;
        for (int j = 0; j < s; ++j)
          if (kA[s][j] != 0.0) stage += (step * kA[s][j]) * k[j];
        k[s] = l * stage;
      }
      ComplexVector y5 = y;
      ComplexVector err = ComplexVector::Zero(y.size());
      for (int s = 0; s < 7; ++s) {
        if (kB5[s] != 0.0) y5 += (step * kB5[s]) * k[s];
        err += (step * (kB5[s] - kB4[s])) * k[s];
      }
      double err_norm = 0.0;
      for (Index i = 0; i < y.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
        err_norm = std::max(err_norm, std::abs(err(i)) / scale);
      }
      const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (err_norm <= 1.0) {
        y = std::move(y5);
        t = last ? t1 : t + step;
        // A clipped final step says nothing about the natural step size.
        if (!last) h = step * factor;
      } else {
        h = step * factor;
      }
    }
  }
};

}  // namespace

void propagate_visit(const Superoperator& superop, const ComplexMatrix& x0, const std::vector<double>& times,
                     Method method, const std::function<void(std::size_t, double, const ComplexMatrix&)>& visit,
                     const PropagationOptions& options) {
  require_time_grid(times);
  if (x0.rows() != superop.dim || x0.cols() != superop.dim)
    raise(ErrorCode::DimensionMismatch, "initial operator dimension does not match the generator");
  require_finite(x0, "initial operator");

  ComplexVector y = vectorize(x0);
  visit(0, times[0], x0);
  if (times.size() == 1) return;

  if (method == Method::Exponential) {
    ExponentialStepper stepper(superop.matrix, options.exp_norm_cap);
    for (std::size_t k = 1; k < times.size(); ++k) {
      stepper.advance(y, times[k] - times[k - 1]);
      visit(k, times[k], unvectorize(y, superop.dim));
    }
  } else {
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    DormandPrince solver(superop.matrix, options.rtol, options.atol * scale, options.max_steps);
    for (std::size_t k = 1; k < times.size(); ++k) {
      solver.advance(y, times[k - 1], times[k]);
      visit(k, times[k], unvectorize(y, superop.dim));
    }
  }
}

Trajectory propagate(const Superoperator& superop, const ComplexMatrix& x0, const std::vector<double>& times,
                     Method method, const PropagationOptions& options) {
  Trajectory traj{superop.picture, method, times, {}};
  traj.snapshots.reserve(times.size());
  propagate_visit(
      superop, x0, times, method, [&](std::size_t, double, const ComplexMatrix& x) { traj.snapshots.push_back(x); },
      options);
  return traj;
}

ComplexMatrix evolve(const Superoperator& superop, const ComplexMatrix& x0, double t,
                     const PropagationOptions& options) {
  if (t == 0.0) return x0;
  ComplexMatrix out;
  propagate_visit(
      superop, x0, {0.0, t}, Method::Exponential,
      [&](std::size_t k, double, const ComplexMatrix& x) {
        if (k == 1) out = x;
      },
      options);
  return out;
}

StationaryReport stationary_report(const Superoperator& superop, const Tolerances& tol) {
  const ComplexMatrix& l = superop.matrix;
  Eigen::BDCSVD<ComplexMatrix> svd(l, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double threshold = tol.kernel * std::max(s(0), std::numeric_limits<double>::min());

  int kernel_dim = 0;
  for (Index i = s.size() - 1; i >= 0 && s(i) <= threshold; --i) ++kernel_dim;

  StationaryReport report;
  report.picture = superop.picture;
  report.kernel_dimension = kernel_dim;
  for (int k = 0; k < kernel_dim; ++k) {
    ComplexVector v = svd.matrixV().col(s.size() - 1 - k);
    Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
    report.kernel_basis.push_back(unvectorize(v, superop.dim));
  }

  Eigen::ComplexEigenSolver<ComplexMatrix> es(l, false);
  ComplexVector ev = es.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(ev(a)), mb = std::abs(ev(b));
    if (ma != mb) return ma < mb;
    if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });
  report.eigenvalues.resize(ev.size());
  for (Index i = 0; i < ev.size(); ++i) report.eigenvalues(i) = ev(order[static_cast<std::size_t>(i)]);

  double max_re = -std::numeric_limits<double>::infinity();
  for (Index i = kernel_dim; i < report.eigenvalues.size(); ++i)
    max_re = std::max(max_re, report.eigenvalues(i).real());
  report.spectral_gap = std::isfinite(max_re) ? std::max(0.0, -max_re) : 0.0;
  report.reducible = kernel_dim > 1;
  return report;
}

ComplexMatrix asymptotic_observable(const ComplexMatrix& b0, const PositiveMatrix& w) {
  if (b0.rows() != w.dim() || b0.cols() != w.dim()) raise(ErrorCode::DimensionMismatch, "B0 and W differ");
  const cdouble tr_w = w.matrix().trace();
  if (!(tr_w.real() > 0)) raise(ErrorCode::InvalidArgument, "tr(W) must be positive");
  return ((b0 * w.matrix()).trace() / tr_w) * identity<double>(w.dim());
}

ComplexMatrix asymptotic_blocks(const ComplexMatrix& b0, const PositiveMatrix& w,
                                const std::vector<ComplexMatrix>& projectors, const Tolerances& tol) {
  const Index d = w.dim();
  if (b0.rows() != d || b0.cols() != d) raise(ErrorCode::DimensionMismatch, "B0 and W differ");
  if (projectors.empty()) raise(ErrorCode::BadDecomposition, "no projectors given");

  const double ptol = tol.commutation * static_cast<double>(d);
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t a = 0; a < projectors.size(); ++a) {
    const auto& p = projectors[a];
    if (p.rows() != d || p.cols() != d) raise(ErrorCode::BadDecomposition, "projector dimension");
    if ((p * p - p).norm() > ptol || (p - p.adjoint()).norm() > ptol)
      raise(ErrorCode::BadDecomposition, "not an orthogonal projector");
    for (std::size_t b = a + 1; b < projectors.size(); ++b)
      if ((p * projectors[b]).norm() > ptol) raise(ErrorCode::BadDecomposition, "projectors are not orthogonal");
    if (commutation_defect<double>(p, w.matrix()) > tol.commutation)
      raise(ErrorCode::BadDecomposition, "projector does not commute with W");
    sum += p;
  }
  if ((sum - identity<double>(d)).norm() > ptol) raise(ErrorCode::BadDecomposition, "projectors do not sum to I");

  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& p : projectors) {
    const cdouble tr_w = (p * w.matrix()).trace();
    if (std::abs(tr_w) == 0.0) continue;
    out += ((p * b0 * p * w.matrix()).trace() / tr_w) * p;
  }
  return out;
}

DensityMatrix normalized_distribution(const PositiveMatrix& w, const Tolerances& tol) {
  const double tr_w = w.matrix().trace().real();
  if (!(tr_w > 0)) raise(ErrorCode::InvalidArgument, "tr(W) must be positive");
  return DensityMatrix(w.matrix() / tr_w, tol);
}

double conservation_residual(const Trajectory& traj, const PositiveMatrix& w, const LindbladModel& model,
                             const Tolerances& tol) {
  if (traj.picture != Picture::Heisenberg)
    raise(ErrorCode::InvalidArgument, "conservation law applies to Heisenberg trajectories");
  if (traj.snapshots.empty()) return 0.0;
  if (w.dim() != model.dim()) raise(ErrorCode::DimensionMismatch, "W and model differ");
  if (commutation_defect<double>(w.matrix(), model.hamiltonian().matrix()) > tol.commutation)
    raise(ErrorCode::AssumptionViolated, "W does not commute with H");
  for (const auto& v : model.lindblad_ops())
    if (commutation_defect<double>(w.matrix(), v.adjoint() * v) > tol.commutation)
      raise(ErrorCode::AssumptionViolated, "W does not commute with V^H V");

  const cdouble start = (traj.snapshots.front() * w.matrix()).trace();
  double worst = 0.0;
  for (const auto& b : traj.snapshots) worst = std::max(worst, std::abs((b * w.matrix()).trace() - start));
  return worst;
}

StackedLindblad stack_lindblads(const LindbladModel& model, const Tolerances& tol) {
  const Index d = model.dim();
  const auto n_ops = static_cast<Index>(model.size());
  const double sqrt_n = std::sqrt(static_cast<double>(n_ops));
  ComplexMatrix v = ComplexMatrix::Zero(n_ops * d, n_ops * d);
  ComplexMatrix u = ComplexMatrix::Zero(n_ops * d, n_ops * d);
  ComplexMatrix w = ComplexMatrix::Zero(n_ops * d, n_ops * d);
  for (Index j = 0; j < n_ops; ++j) {
    const auto& vj = model.lindblad_ops()[static_cast<std::size_t>(j)];
    const auto polar = polar_decompose<double>(vj, tol);
    v.block(j * d, j * d, d, d) = sqrt_n * vj;
    u.block(j * d, j * d, d, d) = polar.unitary.matrix();
    w.block(j * d, j * d, d, d) = build_W<double>(vj, tol).matrix() / static_cast<double>(n_ops);
  }
  return {std::move(v), UnitaryMatrix(std::move(u), tol), PositiveMatrix(std::move(w), tol)};
}

PositiveMatrix multi_W(const LindbladModel& model, const Tolerances& tol) {
  std::vector<PositiveMatrix> ws;
  ws.reserve(model.size());
  for (const auto& v : model.lindblad_ops()) ws.push_back(build_W<double>(v, tol));

  bool equal = true;
  for (const auto& wj : ws) {
    const double rel = (wj.matrix() - ws.front().matrix()).norm() / std::max(1.0, ws.front().matrix().norm());
    if (rel > tol.commutation) equal = false;
  }
  bool positive = true;
  for (const auto& v : model.lindblad_ops()) {
    if (hermiticity_defect<double>(v) > tol.commutation) {
      positive = false;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize<double>(v), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev(0) < -tol.commutation * std::max(1.0, std::abs(ev(ev.size() - 1)))) positive = false;
  }
  if (!equal && !positive)
    raise(ErrorCode::AssumptionViolated, "W_J differ and the V_J are not all positive");

  ComplexMatrix sum = ComplexMatrix::Zero(model.dim(), model.dim());
  for (const auto& wj : ws) {
    if (commutation_defect<double>(wj.matrix(), model.hamiltonian().matrix()) > tol.commutation)
      raise(ErrorCode::AssumptionViolated, "W_J does not commute with H");
    sum += wj.matrix();
  }
  return PositiveMatrix(std::move(sum), tol);
}

cdouble multi_asymptotic_expectation(const ComplexMatrix& b0, const PositiveMatrix& w) {
  if (b0.rows() != w.dim() || b0.cols() != w.dim()) raise(ErrorCode::DimensionMismatch, "B0 and W differ");
  const cdouble tr_w = w.matrix().trace();
  if (!(tr_w.real() > 0)) raise(ErrorCode::InvalidArgument, "tr(W) must be positive");
  return (b0 * w.matrix()).trace() / tr_w;
}

ComplexMatrix propagator(const Superoperator& superop, double t, const PropagationOptions& options) {
  if (!(t >= 0.0)) raise(ErrorCode::InvalidArgument, "time must be non-negative");
  const Index n = superop.matrix.rows();
  if (t == 0.0) return ComplexMatrix::Identity(n, n);
  const double norm1 = superop.matrix.cwiseAbs().colwise().sum().maxCoeff();
  const long substeps = std::max(1L, static_cast<long>(std::ceil(norm1 * t / options.exp_norm_cap)));
  const ComplexMatrix step = matrix_exp<double>(superop.matrix * (t / static_cast<double>(substeps)));
  ComplexMatrix out = step;
  for (long s = 1; s < substeps; ++s) out = step * out;
  return out;
}

double cp_check(const Superoperator& superop, double t) {
  if (superop.picture != Picture::Schrodinger) raise(ErrorCode::InvalidArgument, "CP check needs the Schrodinger picture");
  const Index d = superop.dim;
  const ComplexMatrix map = propagator(superop, t);
  ComplexMatrix choi(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) choi.block(i * d, j * d, d, d) = unvectorize(map.col(i + j * d), d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize<double>(choi), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace lindblad
