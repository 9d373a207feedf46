#pragma once

// Lindblad generators in matrix form, propagation, stationary structure and
// the single- and multi-operator asymptotic formulas.
//
// Operators are vectorized column-major, vec(A X B) = (B^T (x) A) vec(X).
// Heisenberg:   L(B) = i[H,B] + sum_J (V_J^H B V_J - 1/2 {V_J^H V_J, B})
// Schrodinger:  L(r) = -i[H,r] + sum_J (V_J r V_J^H - 1/2 {V_J^H V_J, r})
// so that tr(L_H(B) r) = tr(B L_S(r)).

#include <functional>
#include <string>
#include <vector>

#include "lindbladlab/operator_core.hpp"

namespace lindblad {

/// Hamiltonian plus a non-empty list of Lindblad operators of equal dimension.
/// A non-invertible V_J is recorded as a warning; operations that need
/// W_J = (V_J^H V_J)^{-1} raise SingularInput instead.
class LindbladModel {
 public:
  LindbladModel(HermitianMatrix hamiltonian, std::vector<ComplexMatrix> lindblad_ops,
                const Tolerances& tol = {});

  const HermitianMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<ComplexMatrix>& lindblad_ops() const noexcept { return ops_; }
  Index dim() const noexcept { return hamiltonian_.dim(); }
  std::size_t size() const noexcept { return ops_.size(); }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  HermitianMatrix hamiltonian_;
  std::vector<ComplexMatrix> ops_;
  std::vector<std::string> warnings_;
};

enum class Picture { Heisenberg, Schrodinger };

std::string_view to_string(Picture p);

struct Superoperator {
  Picture picture;
  Index dim;             // d; matrix is d^2 x d^2
  ComplexMatrix matrix;

  ComplexMatrix apply(const ComplexMatrix& x) const;
};

ComplexVector vectorize(const ComplexMatrix& x);
ComplexMatrix unvectorize(const ComplexVector& v, Index d);

Superoperator heisenberg_generator(const LindbladModel& model);
Superoperator schrodinger_generator(const LindbladModel& model);

enum class Method { Exponential, ODE };

std::string_view to_string(Method m);

struct Trajectory {
  Picture picture;
  Method method;
  std::vector<double> times;
  std::vector<ComplexMatrix> snapshots;
};

struct PropagationOptions {
  double rtol = 1e-10;   // ODE per-step relative tolerance
  double atol = 1e-13;   // ODE absolute floor, scaled by max(1, |X0|_max)
  double exp_norm_cap = 32.0;  // exponential substeps keep ||L dt||_1 below this
  std::size_t max_steps = 50'000'000;
};

/// Checks that a time grid starts at 0 and is strictly increasing.
void require_time_grid(const std::vector<double>& times);

/// Uniform grid with steps + 1 points on [0, t_max].
std::vector<double> uniform_grid(double t_max, std::size_t steps);

/// Streams X(t_k) to the visitor for each grid time instead of storing them.
void propagate_visit(const Superoperator& superop, const ComplexMatrix& x0, const std::vector<double>& times,
                     Method method, const std::function<void(std::size_t, double, const ComplexMatrix&)>& visit,
                     const PropagationOptions& options = {});

Trajectory propagate(const Superoperator& superop, const ComplexMatrix& x0, const std::vector<double>& times,
                     Method method, const PropagationOptions& options = {});

/// exp(L t) applied to X0 for a single time.
ComplexMatrix evolve(const Superoperator& superop, const ComplexMatrix& x0, double t,
                     const PropagationOptions& options = {});

/// exp(L t) as a d^2 x d^2 matrix.
ComplexMatrix propagator(const Superoperator& superop, double t, const PropagationOptions& options = {});

struct StationaryReport {
  Picture picture;
  int kernel_dimension;
  std::vector<ComplexMatrix> kernel_basis;  // orthonormal in the Frobenius inner product
  double spectral_gap;                      // -max Re over the non-kernel spectrum, clamped at 0
  bool reducible;                           // kernel_dimension > 1 (meaningful in the Heisenberg picture)
  ComplexVector eigenvalues;                // full spectrum, sorted by |lambda|
};

StationaryReport stationary_report(const Superoperator& superop, const Tolerances& tol = {});

/// (tr(B0 W) / tr(W)) I
ComplexMatrix asymptotic_observable(const ComplexMatrix& b0, const PositiveMatrix& w);

/// Block-constant limit sum_a (tr(P_a B0 P_a W) / tr(P_a W)) P_a for
/// orthogonal projectors P_a that sum to I and commute with W.
ComplexMatrix asymptotic_blocks(const ComplexMatrix& b0, const PositiveMatrix& w,
                                const std::vector<ComplexMatrix>& projectors, const Tolerances& tol = {});

/// W / tr(W)
DensityMatrix normalized_distribution(const PositiveMatrix& w, const Tolerances& tol = {});

/// max_t |tr(B(t) W) - tr(B(0) W)| along a Heisenberg trajectory. Raises
/// AssumptionViolated unless W commutes with H and with every V_J^H V_J.
double conservation_residual(const Trajectory& traj, const PositiveMatrix& w, const LindbladModel& model,
                             const Tolerances& tol = {});

struct StackedLindblad {
  ComplexMatrix v;        // sqrt(N) diag(V_J)
  UnitaryMatrix u;        // diag(U_J)
  PositiveMatrix w;       // diag(W_J) / N
};

StackedLindblad stack_lindblads(const LindbladModel& model, const Tolerances& tol = {});

/// W = sum_J (V_J^H V_J)^{-1}, under either hypothesis: all W_J equal, or
/// every V_J positive. Each W_J must commute with H.
PositiveMatrix multi_W(const LindbladModel& model, const Tolerances& tol = {});

/// tr(B0 W) / tr(W)
cdouble multi_asymptotic_expectation(const ComplexMatrix& b0, const PositiveMatrix& w);

/// Smallest eigenvalue of the Choi matrix sum_ij E_ij (x) Phi_t(E_ij) of
/// Phi_t = exp(L t), for a Schrodinger-picture generator.
double cp_check(const Superoperator& superop, double t);

}  // namespace lindblad
