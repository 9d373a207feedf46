#include "lindbladlab/memory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lindblad {

TensorModel::TensorModel(ComplexMatrix v_tilde, HermitianMatrix h_tilde, HermitianMatrix h_internal,
                         const Tolerances& tol)
    : v_tilde_(std::move(v_tilde)),
      h_tilde_(std::move(h_tilde)),
      h_internal_(std::move(h_internal)),
      w_tilde_(build_W<double>(v_tilde_, tol)) {
  if (v_tilde_.rows() != h_tilde_.dim())
    raise(ErrorCode::DimensionMismatch, "site Lindblad operator and site Hamiltonian differ in dimension");
  if (commutation_defect<double>(w_tilde_.matrix(), h_tilde_.matrix()) > tol.commutation)
    raise(ErrorCode::AssumptionViolated, "[Wt, Ht] != 0");
}

BlockObservable::BlockObservable(ComplexMatrix full, Index m, Index n) : full_(std::move(full)), m_(m), n_(n) {
  if (m <= 0 || n <= 0 || full_.rows() != m * n || full_.cols() != m * n)
    raise(ErrorCode::DimensionMismatch, "block observable dimension is not m * n");
}

LindbladModel assemble_model(const TensorModel& tm, const Tolerances& tol) {
  const ComplexMatrix id_n = identity<double>(tm.n());
  const double sqrt_n = std::sqrt(static_cast<double>(tm.n()));
  ComplexMatrix v = sqrt_n * tensor_product<double>(tm.v_tilde(), id_n);
  HermitianMatrix h(tensor_product<double>(tm.h_tilde().matrix(), tm.h_internal().matrix()), tol);
  return LindbladModel(std::move(h), {std::move(v)}, tol);
}

PositiveMatrix tensor_W(const TensorModel& tm) {
  return PositiveMatrix(tensor_product<double>(tm.w_tilde().matrix(), identity<double>(tm.n())));
}

ComplexMatrix memory_rate(const BlockObservable& b, const TensorModel& tm, cdouble kappa) {
  if (b.m() != tm.m() || b.n() != tm.n()) raise(ErrorCode::DimensionMismatch, "observable does not match the model");
  const ComplexMatrix id_n = identity<double>(tm.n());
  const ComplexMatrix& wt = tm.w_tilde().matrix();
  const ComplexMatrix& ht = tm.h_tilde().matrix();
  const ComplexMatrix& hint = tm.h_internal().matrix();

  const ComplexMatrix left =
      partial_trace_sites<double>(tensor_product<double>(wt * ht, id_n) * b.full(), tm.m(), tm.n());
  const ComplexMatrix right = partial_trace_sites<double>(
      tensor_product<double>(wt, id_n) * b.full() * tensor_product<double>(ht, id_n), tm.m(), tm.n());
  return kappa * (hint * left - right * hint);
}

namespace {

double uniform_step(const std::vector<double>& grid) {
  const double step = grid[1] - grid[0];
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (std::abs(grid[k] - grid[k - 1] - step) > 1e-9 * std::max(1.0, step))
      raise(ErrorCode::InvalidArgument, "needs a uniform grid");
  return step;
}

// Simpson sums on the full grid and on every second point, fed one sample at a time.
class SimpsonAccumulator {
 public:
  SimpsonAccumulator(std::size_t intervals, double step, Index rows, Index cols)
      : intervals_(intervals), step_(step), fine_(ComplexMatrix::Zero(rows, cols)), coarse_(fine_) {
    if (intervals < 4 || intervals % 4 != 0)
      raise(ErrorCode::InvalidArgument, "Simpson with halving needs a multiple of 4 intervals");
  }

  void add(std::size_t k, const ComplexMatrix& sample) {
    fine_ += weight(k, intervals_) * sample;
    if (k % 2 == 0) coarse_ += weight(k / 2, intervals_ / 2) * sample;
  }

  ComplexMatrix fine() const { return fine_ * (step_ / 3.0); }
  ComplexMatrix coarse() const { return coarse_ * (2.0 * step_ / 3.0); }

 private:
  static double weight(std::size_t k, std::size_t n) { return k == 0 || k == n ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0); }

  std::size_t intervals_;
  double step_;
  ComplexMatrix fine_;
  ComplexMatrix coarse_;
};

QuadratureResult checked(ComplexMatrix fine, const ComplexMatrix& coarse, double tol) {
  const double diff = (fine - coarse).norm();
  if (diff > tol) raise(ErrorCode::GridTooCoarse, "halving the grid changes the integral by " + std::to_string(diff));
  return {std::move(fine), diff};
}

}  // namespace

double memory_rate_identity_residual(const TensorModel& tm, const BlockObservable& b0, const std::vector<double>& grid,
                                     cdouble kappa) {
  require_time_grid(grid);
  if (grid.size() < 5) raise(ErrorCode::InvalidArgument, "five-point differences need at least five grid points");
  const double h = uniform_step(grid);
  const Superoperator gen = heisenberg_generator(assemble_model(tm));
  const ComplexMatrix w = tensor_W(tm).matrix();
  const Trajectory traj = propagate(gen, b0.full(), grid, Method::Exponential);

  std::vector<ComplexMatrix> site_trace;
  site_trace.reserve(grid.size());
  for (const auto& b : traj.snapshots) site_trace.push_back(partial_trace_sites<double>(b * w, tm.m(), tm.n()));

  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < grid.size(); ++k) {
    const ComplexMatrix derivative =
        (site_trace[k - 2] - 8.0 * site_trace[k - 1] + 8.0 * site_trace[k + 1] - site_trace[k + 2]) / (12.0 * h);
    const ComplexMatrix rate = memory_rate(BlockObservable(traj.snapshots[k], tm.m(), tm.n()), tm, kappa);
    worst = std::max(worst, (derivative - rate).norm());
  }
  return worst;
}

QuadratureResult simpson_with_halving(const std::vector<ComplexMatrix>& samples, double step, double tol) {
  if (samples.empty()) raise(ErrorCode::InvalidArgument, "Simpson with halving needs a multiple of 4 intervals");
  SimpsonAccumulator acc(samples.size() - 1, step, samples.front().rows(), samples.front().cols());
  for (std::size_t k = 0; k < samples.size(); ++k) acc.add(k, samples[k]);
  return checked(acc.fine(), acc.coarse(), tol);
}

ComplexMatrix memory_integral(const Trajectory& traj, const TensorModel& tm, cdouble kappa, double tol) {
  if (traj.picture != Picture::Heisenberg) raise(ErrorCode::InvalidArgument, "memory integral needs a Heisenberg trajectory");
  if (traj.snapshots.size() != traj.times.size()) raise(ErrorCode::InvalidArgument, "trajectory is inconsistent");
  if (traj.times.size() == 1) return ComplexMatrix::Zero(tm.n(), tm.n());
  const double step = uniform_step(traj.times);
  std::vector<ComplexMatrix> rates;
  rates.reserve(traj.snapshots.size());
  for (const auto& b : traj.snapshots) rates.push_back(memory_rate(BlockObservable(b, tm.m(), tm.n()), tm, kappa));
  return simpson_with_halving(rates, step, tol).value;
}

ComplexMatrix extract_internal(const BlockObservable& b) {
  return partial_trace_sites<double>(b.full(), b.m(), b.n()) / static_cast<double>(b.m());
}

double convergence_horizon(const TensorModel& tm, double multiplier, const Tolerances& tol) {
  const StationaryReport report = stationary_report(heisenberg_generator(assemble_model(tm, tol)), tol);
  if (!(report.spectral_gap > 0.0)) raise(ErrorCode::NonConvergent, "assembled model has no spectral gap");
  return multiplier / report.spectral_gap;
}

namespace {

struct LongTimeRun {
  ComplexMatrix late_average;   // over [(1 - f) T, T]
  ComplexMatrix early_average;  // over [(1/2 - f) T, T / 2]
  ComplexMatrix integral_fine;  // of B(t) over [0, T]
  ComplexMatrix integral_coarse;
  double step = 0.0;
  std::size_t steps = 0;
};

LongTimeRun run_long_time(const TensorModel& tm, const BlockObservable& b0, double horizon,
                          const MemoryOptions& options, bool integrate) {
  if (b0.m() != tm.m() || b0.n() != tm.n()) raise(ErrorCode::DimensionMismatch, "observable does not match the model");
  if (!(horizon > 0.0)) raise(ErrorCode::InvalidArgument, "horizon must be positive");
  const Superoperator gen = heisenberg_generator(assemble_model(tm));

  double step = options.step;
  if (step <= 0.0) {
    const double norm1 = gen.matrix.cwiseAbs().colwise().sum().maxCoeff();
    step = std::min(0.01, 0.05 / std::max(norm1, 1.0));
  }
  const auto quarter = static_cast<std::size_t>(std::ceil(horizon / (4.0 * step)));
  LongTimeRun run;
  run.steps = 4 * std::max<std::size_t>(quarter, 1);
  run.step = horizon / static_cast<double>(run.steps);
  const std::vector<double> grid = uniform_grid(horizon, run.steps);

  const double f = options.average_fraction;
  const auto late_begin = static_cast<std::size_t>(std::ceil((1.0 - f) * static_cast<double>(run.steps)));
  const std::size_t early_end = run.steps / 2;
  const std::size_t early_begin = early_end - (run.steps - late_begin);

  const Index d = tm.dim();
  run.late_average = ComplexMatrix::Zero(d, d);
  run.early_average = ComplexMatrix::Zero(d, d);
  std::optional<SimpsonAccumulator> acc;
  if (integrate) acc.emplace(run.steps, run.step, d, d);

  propagate_visit(gen, b0.full(), grid, Method::Exponential, [&](std::size_t k, double, const ComplexMatrix& b) {
    if (acc) acc->add(k, b);
    if (k >= late_begin) run.late_average += b;
    if (k >= early_begin && k <= early_end) run.early_average += b;
  });
  const auto window = static_cast<double>(run.steps - late_begin + 1);
  run.late_average /= window;
  run.early_average /= window;
  if (acc) {
    run.integral_fine = acc->fine();
    run.integral_coarse = acc->coarse();
  }
  return run;
}

}  // namespace

MemoryReport b_infinity(const TensorModel& tm, const BlockObservable& b0, double horizon,
                        const MemoryOptions& options) {
  LongTimeRun run = run_long_time(tm, b0, horizon, options, true);
  const Index m = tm.m(), n = tm.n();

  MemoryReport report;
  report.kappa = options.kappa;
  report.horizon = horizon;
  report.step = run.step;
  report.steps = run.steps;
  report.static_term = partial_trace_sites<double>(b0.full() * tensor_W(tm).matrix(), m, n);
  // the rate is linear in B
  const QuadratureResult quad =
      checked(memory_rate(BlockObservable(run.integral_fine, m, n), tm, options.kappa),
              memory_rate(BlockObservable(run.integral_coarse, m, n), tm, options.kappa), options.quadrature_tol);
  report.memory_integral_value = quad.value;
  report.quadrature_error = quad.halving_difference;
  const cdouble tr_wt = tm.w_tilde().matrix().trace();
  report.b_infinity = (report.static_term + report.memory_integral_value) / tr_wt;

  const BlockObservable late(run.late_average, m, n);
  report.direct_b = extract_internal(late);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k)
      if (i != k) report.residual_off_block = std::max(report.residual_off_block, late.block(i, k).norm());
  report.drift = (run.late_average - run.early_average).norm();
  report.route_difference = (report.b_infinity - report.direct_b).norm();

  if (report.residual_off_block > options.convergence_tol || report.drift > options.convergence_tol)
    raise(ErrorCode::NonConvergent, "B(t) has not settled: off-block " + std::to_string(report.residual_off_block) +
                                        ", drift " + std::to_string(report.drift));
  return report;
}

cdouble memory_expectation(const DensityMatrix& rho0, const ComplexMatrix& b_inf) {
  const Index n = b_inf.rows();
  if (n == 0 || b_inf.cols() != n || rho0.dim() % n != 0)
    raise(ErrorCode::DimensionMismatch, "state dimension is not a multiple of the internal dimension");
  const Index m = rho0.dim() / n;
  cdouble sum = 0.0;
  for (Index i = 0; i < m; ++i) sum += (rho0.matrix().block(i * n, i * n, n, n) * b_inf).trace();
  return sum;
}

WitnessResult memory_witness(const TensorModel& tm, const BlockObservable& b0, const DensityMatrix& rho_a,
                             const DensityMatrix& rho_b, double horizon, const MemoryOptions& options) {
  const Index m = tm.m(), n = tm.n();
  if (rho_a.dim() != tm.dim() || rho_b.dim() != tm.dim())
    raise(ErrorCode::DimensionMismatch, "witness states do not match the model");
  const double marginal_gap = (partial_trace_internal<double>(rho_a.matrix(), m, n) -
                               partial_trace_internal<double>(rho_b.matrix(), m, n))
                                  .norm();
  if (marginal_gap > 1e-10) raise(ErrorCode::AssumptionViolated, "witness states have different site marginals");

  const LongTimeRun run = run_long_time(tm, b0, horizon, options, false);
  WitnessResult result;
  result.expectation_a = (run.late_average * rho_a.matrix()).trace();
  result.expectation_b = (run.late_average * rho_b.matrix()).trace();
  result.drift_a = std::abs(result.expectation_a - (run.early_average * rho_a.matrix()).trace());
  result.drift_b = std::abs(result.expectation_b - (run.early_average * rho_b.matrix()).trace());
  if (result.drift_a > 1e-5 || result.drift_b > 1e-5)
    raise(ErrorCode::NonConvergent, "witness expectations have not converged");
  result.delta = std::abs(result.expectation_a - result.expectation_b);
  result.certified = result.delta > 1e-3;
  return result;
}

}  // namespace lindblad
