#pragma once

// Scale-separated Lindblad models: V = sqrt(n) (Vt (x) I_n), H = Ht (x) Hint,
// with m sites and an n-dimensional internal space. The site trace of B W is
// no longer conserved; its rate is the memory rate below, and the asymptotic
// internal observable b(inf) picks up the time integral of that rate.

#include <vector>

#include "lindbladlab/lindblad.hpp"

namespace lindblad {

inline const cdouble kKappaI{0.0, 1.0};
inline const cdouble kKappaOne{1.0, 0.0};

class TensorModel {
 public:
  /// Raises SingularInput if Vt is singular and AssumptionViolated unless
  /// Wt = (Vt^H Vt)^{-1} commutes with Ht.
  TensorModel(ComplexMatrix v_tilde, HermitianMatrix h_tilde, HermitianMatrix h_internal, const Tolerances& tol = {});

  const ComplexMatrix& v_tilde() const noexcept { return v_tilde_; }
  const HermitianMatrix& h_tilde() const noexcept { return h_tilde_; }
  const HermitianMatrix& h_internal() const noexcept { return h_internal_; }
  const PositiveMatrix& w_tilde() const noexcept { return w_tilde_; }
  Index m() const noexcept { return h_tilde_.dim(); }
  Index n() const noexcept { return h_internal_.dim(); }
  Index dim() const noexcept { return m() * n(); }

 private:
  ComplexMatrix v_tilde_;
  HermitianMatrix h_tilde_;
  HermitianMatrix h_internal_;
  PositiveMatrix w_tilde_;
};

/// An (m n) x (m n) operator viewed as an m x m array of n x n blocks.
class BlockObservable {
 public:
  BlockObservable(ComplexMatrix full, Index m, Index n);

  const ComplexMatrix& full() const noexcept { return full_; }
  Index m() const noexcept { return m_; }
  Index n() const noexcept { return n_; }
  ComplexMatrix block(Index i, Index k) const { return full_.block(i * n_, k * n_, n_, n_); }

 private:
  ComplexMatrix full_;
  Index m_;
  Index n_;
};

LindbladModel assemble_model(const TensorModel& tm, const Tolerances& tol = {});

/// Wt (x) I_n. The assembled V carries sqrt(n), so build_W(V) is this divided by n.
PositiveMatrix tensor_W(const TensorModel& tm);

/// kappa (Hint Tr~((Wt Ht (x) I) B) - Tr~((Wt (x) I) B (Ht (x) I)) Hint)
ComplexMatrix memory_rate(const BlockObservable& b, const TensorModel& tm, cdouble kappa);

/// Largest deviation between the central difference of Tr~(B(t) W) and the
/// memory rate at the interior points of the grid.
double memory_rate_identity_residual(const TensorModel& tm, const BlockObservable& b0, const std::vector<double>& grid,
                                     cdouble kappa);

/// Composite Simpson rule on a uniform grid with a multiple of 4 intervals.
/// Raises GridTooCoarse if halving the grid moves the result by more than tol.
struct QuadratureResult {
  ComplexMatrix value;
  double halving_difference;
};

QuadratureResult simpson_with_halving(const std::vector<ComplexMatrix>& samples, double step, double tol = 1e-6);

/// Integral of the memory rate along a uniformly sampled Heisenberg trajectory.
ComplexMatrix memory_integral(const Trajectory& traj, const TensorModel& tm, cdouble kappa, double tol = 1e-6);

/// Tr~(B) / m
ComplexMatrix extract_internal(const BlockObservable& b);

struct MemoryOptions {
  cdouble kappa = kKappaI;
  double step = 0.0;                  // 0 picks 0.05 / ||L||_1, capped at 0.01
  double average_fraction = 0.2;      // trailing window used for time averages
  double convergence_tol = 1e-4;
  double quadrature_tol = 1e-6;
};

struct MemoryReport {
  ComplexMatrix b_infinity;             // (static_term + memory_integral_value) / tr(Wt)
  ComplexMatrix memory_integral_value;
  ComplexMatrix static_term;            // Tr~(B0 W)
  ComplexMatrix direct_b;               // extract_internal of time-averaged B(T)
  double residual_off_block = 0.0;
  // diagnostics
  cdouble kappa;
  double horizon = 0.0;
  double step = 0.0;
  std::size_t steps = 0;
  double route_difference = 0.0;        // ||b_infinity - direct_b||_F
  double drift = 0.0;                   // ||<B>_[0.8T,T] - <B>_[0.3T,0.5T]||_F
  double quadrature_error = 0.0;
};

/// Horizon multiplier / gap of the assembled Heisenberg generator.
double convergence_horizon(const TensorModel& tm, double multiplier = 30.0, const Tolerances& tol = {});

MemoryReport b_infinity(const TensorModel& tm, const BlockObservable& b0, double horizon,
                        const MemoryOptions& options = {});

/// sum_i tr_n(rho_ii b)
cdouble memory_expectation(const DensityMatrix& rho0, const ComplexMatrix& b_inf);

struct WitnessResult {
  double delta = 0.0;
  cdouble expectation_a;
  cdouble expectation_b;
  double drift_a = 0.0;
  double drift_b = 0.0;
  bool certified = false;  // delta > 1e-3
};

/// Asymptotic expectation of B in two states with identical site marginals.
/// Raises AssumptionViolated if the site marginals differ and NonConvergent if
/// either expectation drifts by more than 1e-5 between the averaging windows.
WitnessResult memory_witness(const TensorModel& tm, const BlockObservable& b0, const DensityMatrix& rho_a,
                             const DensityMatrix& rho_b, double horizon, const MemoryOptions& options = {});

}  // namespace lindblad
