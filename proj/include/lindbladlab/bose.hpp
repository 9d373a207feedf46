#pragma once

// Geometric W-sums with V = exp(-beta H / 2), the Bose-Einstein operator
// 1 / (e^{beta H} - 1), and the Fock-space trace ratio
//
//   sum_J tr_sym(B_F (V^H V)^{(x) J}) / sum_J tr_sym((V^H V)^{(x) J}),
//
// where B_F places B on each of the J factors in turn and tr_sym runs over
// the symmetric subspace. The vacuum J = 0 contributes 1 to the denominator.

#include <optional>
#include <string>
#include <vector>

#include "lindbladlab/occupation_basis.hpp"
#include "lindbladlab/operator_core.hpp"

namespace lindblad {

class BoseModel {
 public:
  /// Requires beta > 0 and every eigenvalue of beta H at least 1e-8.
  BoseModel(HermitianMatrix hamiltonian, double beta);

  const HermitianMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  double beta() const noexcept { return beta_; }
  Index dim() const noexcept { return hamiltonian_.dim(); }

  /// exp(-beta H / 2)
  PositiveMatrix lindblad_root() const;

 private:
  HermitianMatrix hamiltonian_;
  double beta_;
};

/// sum_{J=1}^{N} (V^H V)^J
PositiveMatrix geometric_W(const PositiveMatrix& v, int terms);

/// (V^H V)(I - V^H V)^{-1}; raises Divergent unless the spectral radius of V^H V is below 1.
PositiveMatrix geometric_W_infinite(const PositiveMatrix& v);

/// 1 / (W_h - 1) with W_h = (V^H V)^{-1}, evaluated spectrally.
PositiveMatrix fock_bose_W(const PositiveMatrix& v);

/// 1 / (e^{beta H} - 1)
PositiveMatrix bose_distribution(const BoseModel& model);

/// tr(1 / (e^{beta H} - 1))
double nbar(const BoseModel& model);

/// tr(B n) when raw, tr(B n) / nbar when normalized, with n the Bose operator.
cdouble bose_expectation(const ComplexMatrix& b, const BoseModel& model, bool normalized);

enum class FockPath { Auto, Dense, Occupation };

std::string_view to_string(FockPath p);

struct FockOptions {
  FockPath path = FockPath::Auto;
  std::size_t dense_cap = kDefaultDenseCap;
  int occupation_max = 10'000;
  bool include_vacuum = true;
};

struct BoseReport {
  cdouble analytic_expectation;  // tr(B / (e^{beta H} - 1))
  cdouble fock_ratio;
  double nbar = 0.0;
  int j_max = 0;
  double tail_bound = 0.0;       // absolute bound on |fock_ratio - untruncated ratio|
  FockPath path = FockPath::Auto;
  std::vector<cdouble> sector_numerators;  // tr_sym(B_F x^{(x) J}), J = 0..j_max
  std::vector<double> sector_traces;       // tr_sym(x^{(x) J})
};

/// Fock-space trace ratio truncated at J_max. The occupation path applies when
/// B is diagonal in an eigenbasis of H; otherwise the dense symmetric-subspace
/// path is used and d^J must stay within the dense cap.
BoseReport fock_expectation(const ComplexMatrix& b, const BoseModel& model, int j_max, const FockOptions& options = {});

struct ClusterCheck {
  double residual = 0.0;           // |fock_ratio - tr(B n)| / |tr(B n)|
  double relative_tail_bound = 0.0;
  BoseReport report;
};

ClusterCheck cluster_check(const ComplexMatrix& b, const BoseModel& model, int j_max, const FockOptions& options = {});

/// Applies A to tensor factor k of a vector in (C^d)^{(x) J}; factor 0 is the most significant.
ComplexVector apply_on_factor(const ComplexMatrix& a, const ComplexVector& psi, int factor, int j);

}  // namespace lindblad
