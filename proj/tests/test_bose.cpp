#include <gtest/gtest.h>

#include <cmath>

#include "lindbladlab/bose.hpp"
#include "lindbladlab/lindblad.hpp"
#include "lindbladlab/random_models.hpp"
#include "oracles.hpp"

using namespace lindblad;
using oracle::eye;

namespace {

ComplexMatrix diag(std::initializer_list<cdouble> entries) {
  ComplexVector v(static_cast<Index>(entries.size()));
  Index k = 0;
  for (cdouble e : entries) v(k++) = e;
  return v.asDiagonal();
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

const double e1 = std::exp(1.0);

BoseModel diag12() { return BoseModel(HermitianMatrix(diag({1, 2})), 1.0); }

}  // namespace

TEST(Geometric, ScalarSums) {
  const PositiveMatrix v(eye(2) / std::sqrt(2.0));
  EXPECT_LT((geometric_W(v, 2).matrix() - 0.75 * eye(2)).norm(), 1e-15);
  EXPECT_LT((fock_bose_W(v).matrix() - eye(2)).norm(), 1e-14);
  EXPECT_LT((geometric_W_infinite(v).matrix() - eye(2)).norm(), 1e-14);
  EXPECT_EQ(code_of([] { geometric_W_infinite(PositiveMatrix(eye(2))); }), ErrorCode::Divergent);
}

TEST(Geometric, InfiniteSumIsBoseOperator) {
  random::Engine rng(41);
  for (int k = 0; k < 3; ++k) {
    const BoseModel model = random::bose(3, 1.0, rng);
    const PositiveMatrix v = model.lindblad_root();
    const ComplexMatrix n = bose_distribution(model).matrix();
    EXPECT_LT((geometric_W_infinite(v).matrix() - n).norm(), 1e-12 * n.norm());
    EXPECT_LT((fock_bose_W(v).matrix() - n).norm(), 1e-12 * n.norm());
  }
}

TEST(Geometric, FiniteTruncationTail) {
  // beta * eps_min = 1: the first omitted term is e^{-51}, so the relative
  // difference sits at e^{-50}-scale plus rounding.
  const BoseModel model(HermitianMatrix(diag({1, 1.5})), 1.0);
  const PositiveMatrix v = model.lindblad_root();
  const ComplexMatrix finite = geometric_W(v, 50).matrix();
  const ComplexMatrix inf = geometric_W_infinite(v).matrix();
  EXPECT_LE((finite - inf).norm() / inf.norm(), std::exp(-50.0) + 64 * 2.22e-16);
}

TEST(BoseDistribution, ScalarValues) {
  const BoseModel ln2(HermitianMatrix(diag({std::log(2.0)})), 1.0);
  EXPECT_NEAR(bose_distribution(ln2).matrix()(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(nbar(ln2), 1.0, 1e-14);

  const BoseModel cold(HermitianMatrix(diag({1})), 20.0);
  const double n = bose_distribution(cold).matrix()(0, 0).real();
  EXPECT_NEAR(n / std::exp(-20.0), 1.0, 1e-8);

  random::Engine rng(42);
  const BoseModel model = random::bose(3, 1.0, rng);
  EXPECT_LT(commutation_defect<double>(bose_distribution(model).matrix(), model.hamiltonian().matrix()), 1e-12);
}

TEST(BoseDistribution, MeanOccupation) {
  EXPECT_NEAR(nbar(diag12()), 1 / (e1 - 1) + 1 / (e1 * e1 - 1), 1e-14);
  EXPECT_NEAR(nbar(diag12()), 0.73849435, 1e-8);
}

TEST(BoseExpectation, ProjectorAndNormalization) {
  const BoseModel model = diag12();
  EXPECT_NEAR(bose_expectation(diag({1, 0}), model, false).real(), 1 / (e1 - 1), 1e-14);
  EXPECT_NEAR(bose_expectation(diag({1, 0}), model, false).real(), 0.581977, 1e-6);
  EXPECT_NEAR(bose_expectation(eye(2), model, true).real(), 1.0, 1e-14);

  random::Engine rng(43);
  const BoseModel rm = random::bose(3, 1.0, rng);
  const ComplexMatrix b = random::hermitian(3, rng).matrix();
  const cdouble via_multi = multi_asymptotic_expectation(b, geometric_W_infinite(rm.lindblad_root()));
  EXPECT_LT(std::abs(bose_expectation(b, rm, true) - via_multi), 1e-12);
}

TEST(BoseModel, RejectsNonPositiveSpectrum) {
  EXPECT_EQ(code_of([] { BoseModel(HermitianMatrix(diag({0, 1})), 1.0); }), ErrorCode::SpectrumAtSingularity);
  EXPECT_EQ(code_of([] { BoseModel(HermitianMatrix(diag({1, 1})), -1.0); }), ErrorCode::InvalidArgument);
}

TEST(Fock, SingleModeGeometricSeries) {
  const BoseModel model(HermitianMatrix(diag({1})), 1.0);
  const ClusterCheck c = cluster_check(eye(1), model, 60);
  EXPECT_NEAR(c.report.fock_ratio.real(), 1 / (e1 - 1), 1e-12);
  EXPECT_LE(c.residual, 1e-12);
}

TEST(Fock, IdentityGivesMeanParticleNumber) {
  const BoseModel model = diag12();
  const BoseReport rep = fock_expectation(eye(2), model, 40);
  EXPECT_LE(std::abs(rep.fock_ratio - nbar(model)), std::max(rep.tail_bound, 1e-12));
  EXPECT_EQ(rep.path, FockPath::Occupation);
}

TEST(Fock, DenseNonDiagonalMatchesBoseFormula) {
  const BoseModel model = diag12();
  random::Engine rng(44);
  const ComplexMatrix b = random::hermitian(2, rng).matrix();
  const ClusterCheck c = cluster_check(b, model, 10);
  EXPECT_EQ(c.report.path, FockPath::Dense);
  EXPECT_LE(c.residual, std::max(c.relative_tail_bound, 1e-8));
}

TEST(Fock, DiagonalThreeModes) {
  const BoseModel model(HermitianMatrix(diag({1, 1.3, 2})), 1.0);
  const ClusterCheck c = cluster_check(diag({0.5, -1, 2}), model, 40);
  EXPECT_EQ(c.report.path, FockPath::Occupation);
  EXPECT_LE(c.residual, std::max(c.relative_tail_bound, 1e-8));
  EXPECT_LT(c.relative_tail_bound, 1e-10);
}

TEST(Fock, PathsAgreeWithBruteForce) {
  random::Engine rng(45);
  const BoseModel model = random::bose(2, 1.0, rng);
  const ComplexMatrix x = model.lindblad_root().matrix() * model.lindblad_root().matrix();
  const ComplexMatrix h = model.hamiltonian().matrix();
  const ComplexMatrix b = random::hermitian(2, rng).matrix();
  FockOptions dense;
  dense.path = FockPath::Dense;
  const cdouble ref = oracle::fock_ratio_bruteforce(b, x, 4);
  EXPECT_LT(std::abs(fock_expectation(b, model, 4, dense).fock_ratio - ref), 1e-12);

  FockOptions occ;
  occ.path = FockPath::Occupation;
  const cdouble ref_h = oracle::fock_ratio_bruteforce(h, x, 4);
  EXPECT_LT(std::abs(fock_expectation(h, model, 4, occ).fock_ratio - ref_h), 1e-12);
  EXPECT_LT(std::abs(fock_expectation(h, model, 4, dense).fock_ratio - ref_h), 1e-12);
}

TEST(Fock, SectorTracesAndVacuum) {
  const BoseModel model(HermitianMatrix(diag({1})), 1.0);
  const BoseReport rep = fock_expectation(eye(1), model, 5);
  ASSERT_EQ(rep.sector_traces.size(), 6u);
  for (int j = 0; j <= 5; ++j) EXPECT_NEAR(rep.sector_traces[j], std::exp(-double(j)), 1e-15);
  EXPECT_EQ(rep.sector_numerators.front(), cdouble(0));
}

TEST(Fock, GuardsAndCaps) {
  const BoseModel model = diag12();
  random::Engine rng(46);
  const ComplexMatrix b = random::hermitian(2, rng).matrix();
  FockOptions occ;
  occ.path = FockPath::Occupation;
  EXPECT_EQ(code_of([&] { fock_expectation(b, model, 5, occ); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { fock_expectation(b, model, 13); }), ErrorCode::CapExceeded);
  EXPECT_EQ(code_of([&] { fock_expectation(b, model, -1); }), ErrorCode::InvalidArgument);
}

TEST(ApplyOnFactor, MatchesKroneckerEmbedding) {
  random::Engine rng(47);
  const ComplexMatrix a = random::gaussian(2, 2, rng);
  const ComplexVector psi = random::gaussian(8, 1, rng);
  for (int k = 0; k < 3; ++k) {
    const ComplexMatrix full = oracle::kron(oracle::kron(oracle::kron_power(eye(2), k), a), oracle::kron_power(eye(2), 2 - k));
    EXPECT_LT((apply_on_factor(a, psi, k, 3) - full * psi).norm(), 1e-14);
  }
}
