#include <gtest/gtest.h>

#include <cmath>

#include "lindbladlab/memory.hpp"
#include "lindbladlab/random_models.hpp"
#include "oracles.hpp"

using namespace lindblad;
using oracle::eye;
using oracle::kron;

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

const ComplexMatrix kSx = (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished();
const ComplexMatrix kSz = diag({1, -1});

ComplexMatrix bloch_projector(double x, double z) { return 0.5 * (eye(2) + x * kSx + z * kSz); }

TensorModel witness_model(double h_scale) {
  const double th = 0.7, ph = 0.4;
  ComplexMatrix u(2, 2);
  u << std::cos(th), -std::sin(th) * std::polar(1.0, -ph), std::sin(th) * std::polar(1.0, ph), std::cos(th);
  const ComplexMatrix vt = u * diag({1, 1 / std::sqrt(2.0)});
  return TensorModel(vt, HermitianMatrix(h_scale * diag({0.3, -0.5})), HermitianMatrix(kSz));
}

}  // namespace

TEST(Assemble, DiagonalCases) {
  const TensorModel unit(eye(3), HermitianMatrix(eye(3)), HermitianMatrix(eye(2)));
  EXPECT_LT((assemble_model(unit).lindblad_ops().front() - std::sqrt(2.0) * eye(6)).norm(), 1e-14);
  EXPECT_LT((tensor_W(unit).matrix() - eye(6)).norm(), 1e-13);

  const TensorModel dm(diag({1, 2}), HermitianMatrix(diag({0.5, 1})), HermitianMatrix(diag({1, -1})));
  EXPECT_LT((assemble_model(dm).lindblad_ops().front() - std::sqrt(2.0) * diag({1, 1, 2, 2})).norm(), 1e-14);
  EXPECT_LT((tensor_W(dm).matrix() - diag({1, 1, 0.25, 0.25})).norm(), 1e-14);
  EXPECT_LT((assemble_model(dm).hamiltonian().matrix() - kron(diag({0.5, 1}), diag({1, -1}))).norm(), 1e-15);
}

TEST(Assemble, SqrtNConventionAndPolarSplit) {
  random::Engine rng(21);
  for (int k = 0; k < 3; ++k) {
    const TensorModel tm = random::tensor(3, 2, rng);
    const ComplexMatrix v = assemble_model(tm).lindblad_ops().front();
    EXPECT_LT((build_W<double>(v).matrix() - tensor_W(tm).matrix() / 2.0).norm(), 1e-11);
    const auto whole = polar_decompose<double>(v);
    const auto site = oracle::polar_svd(tm.v_tilde());
    EXPECT_LT((whole.unitary.matrix() - kron(site.u, eye(2))).norm(), 1e-11);
  }
}

TEST(TensorModel, RejectsNonCommutingSiteHamiltonian) {
  random::Engine rng(22);
  const ComplexMatrix vt = random::invertible(2, rng);
  EXPECT_EQ(code_of([&] { TensorModel(vt, random::hermitian(2, rng), HermitianMatrix(kSz)); }),
            ErrorCode::AssumptionViolated);
}

TEST(MemoryRate, MatchesSiteTraceDerivative) {
  random::Engine rng(23);
  for (int k = 0; k < 5; ++k) {
    const TensorModel tm = random::tensor(2 + k % 2, 2 + k / 3, rng);
    const BlockObservable b(random::gaussian(tm.dim(), tm.dim(), rng), tm.m(), tm.n());
    const ComplexMatrix rate = memory_rate(b, tm, kKappaI);
    EXPECT_LT((rate - oracle::site_trace_derivative(tm, b.full())).norm(), 1e-12);
    EXPECT_LT((rate - oracle::memory_rate_commutator(b, tm, kKappaI)).norm(), 1e-12);
    EXPECT_LT(std::abs(rate.trace()), 1e-12);
  }
}

TEST(MemoryRate, VanishingCases) {
  random::Engine rng(24);
  const TensorModel tm = random::tensor(2, 2, rng);
  const TensorModel flat(tm.v_tilde(), HermitianMatrix(ComplexMatrix::Zero(2, 2)), tm.h_internal());
  const BlockObservable b(random::gaussian(4, 4, rng), 2, 2);
  EXPECT_LT(memory_rate(b, flat, kKappaI).norm(), 1e-15);

  const TensorModel trivial(tm.v_tilde(), tm.h_tilde(), HermitianMatrix(eye(2)));
  const BlockObservable scalar_blocks(kron(random::gaussian(2, 2, rng), eye(2)), 2, 2);
  EXPECT_LT(memory_rate(scalar_blocks, trivial, kKappaI).norm(), 1e-14);
}

TEST(MemoryRate, IdentityResidualSelectsKappa) {
  random::Engine rng(25);
  const PositiveMatrix wt = random::positive_definite(2, rng);
  const ComplexMatrix ht = hermitize<double>(wt.matrix() * wt.matrix() - 0.3 * wt.matrix());
  const TensorModel tm(random::unitary(2, rng).matrix(), HermitianMatrix(ht), random::hermitian(2, rng));
  const BlockObservable b0(random::hermitian(4, rng).matrix(), 2, 2);
  const auto grid = uniform_grid(0.2, 200);
  EXPECT_LE(memory_rate_identity_residual(tm, b0, grid, kKappaI), 1e-6);
  EXPECT_GT(memory_rate_identity_residual(tm, b0, grid, kKappaOne), 1e-2);

  const TensorModel flat(tm.v_tilde(), HermitianMatrix(ComplexMatrix::Zero(2, 2)), tm.h_internal());
  EXPECT_LE(memory_rate_identity_residual(flat, b0, grid, kKappaI), 1e-9);
}

TEST(Quadrature, SimpsonExactForCubicsAndFlagsCoarseGrids) {
  std::vector<ComplexMatrix> samples;
  const double h = 0.25;
  for (int k = 0; k <= 8; ++k) {
    const double t = k * h;
    samples.push_back(ComplexMatrix::Constant(1, 1, t * t * t - t));
  }
  const QuadratureResult q = simpson_with_halving(samples, h);
  EXPECT_NEAR(q.value(0, 0).real(), 4.0 - 2.0, 1e-13);
  EXPECT_EQ(code_of([&] { simpson_with_halving(std::vector<ComplexMatrix>(samples.begin(), samples.begin() + 7), h); }),
            ErrorCode::InvalidArgument);

  std::vector<ComplexMatrix> wiggle;
  for (int k = 0; k <= 8; ++k) wiggle.push_back(ComplexMatrix::Constant(1, 1, std::cos(40.0 * k)));
  EXPECT_EQ(code_of([&] { simpson_with_halving(wiggle, 1.0); }), ErrorCode::GridTooCoarse);
}

TEST(MemoryIntegral, ConstantAndFlatTrajectories) {
  random::Engine rng(26);
  const TensorModel tm = random::tensor(2, 2, rng);
  const ComplexMatrix b0 = random::hermitian(4, rng).matrix();
  Trajectory traj{Picture::Heisenberg, Method::Exponential, uniform_grid(2.0, 8), {}};
  traj.snapshots.assign(traj.times.size(), b0);
  const ComplexMatrix rate = memory_rate(BlockObservable(b0, 2, 2), tm, kKappaI);
  EXPECT_LT((memory_integral(traj, tm, kKappaI) - 2.0 * rate).norm(), 1e-12);

  const TensorModel flat(tm.v_tilde(), HermitianMatrix(ComplexMatrix::Zero(2, 2)), tm.h_internal());
  EXPECT_LT(memory_integral(traj, flat, kKappaI).norm(), 1e-15);
}

TEST(MemoryIntegral, SelfConvergesWithHorizon) {
  random::Engine rng(27);
  const TensorModel tm = random::tensor(2, 2, rng);
  const BlockObservable b0(random::hermitian(4, rng).matrix(), 2, 2);
  const auto gen = heisenberg_generator(assemble_model(tm));
  const double t30 = convergence_horizon(tm, 30.0), t60 = convergence_horizon(tm, 60.0);
  const std::size_t steps = 4 * static_cast<std::size_t>(std::ceil(t30 / 0.04));
  const Trajectory a = propagate(gen, b0.full(), uniform_grid(t30, steps), Method::Exponential);
  const Trajectory b = propagate(gen, b0.full(), uniform_grid(t60, 2 * steps), Method::Exponential);
  EXPECT_LT((memory_integral(a, tm, kKappaI) - memory_integral(b, tm, kKappaI)).norm(), 1e-6);
}

TEST(ExtractInternal, SimpleCasesAndLinearity) {
  random::Engine rng(28);
  const ComplexMatrix b = random::gaussian(2, 2, rng);
  EXPECT_LT((extract_internal(BlockObservable(kron(eye(3), b), 3, 2)) - b).norm(), 1e-15);
  ComplexMatrix off = random::gaussian(6, 6, rng);
  for (Index i = 0; i < 3; ++i) off.block(2 * i, 2 * i, 2, 2).setZero();
  EXPECT_EQ(extract_internal(BlockObservable(off, 3, 2)).norm(), 0.0);
  const ComplexMatrix x = random::gaussian(6, 6, rng), y = random::gaussian(6, 6, rng);
  const cdouble a(0.3, -1.2);
  const ComplexMatrix lhs = extract_internal(BlockObservable(x + a * y, 3, 2));
  const ComplexMatrix rhs = extract_internal(BlockObservable(x, 3, 2)) + a * extract_internal(BlockObservable(y, 3, 2));
  EXPECT_LT((lhs - rhs).norm(), 1e-14);
}

TEST(BInfinity, IdentityIsFixed) {
  random::Engine rng(29);
  const TensorModel tm = random::tensor(2, 2, rng);
  const MemoryReport rep = b_infinity(tm, BlockObservable(eye(4), 2, 2), convergence_horizon(tm));
  EXPECT_LT((rep.b_infinity - eye(2)).norm(), 1e-9);
  EXPECT_LT((rep.direct_b - eye(2)).norm(), 1e-9);
}

TEST(BInfinity, FlatSiteHamiltonianHasNoMemory) {
  const TensorModel tm = witness_model(0.0);
  random::Engine rng(30);
  const BlockObservable b0(random::hermitian(4, rng).matrix(), 2, 2);
  const MemoryReport rep = b_infinity(tm, b0, convergence_horizon(tm));
  EXPECT_LT(rep.memory_integral_value.norm(), 1e-12);
  const ComplexMatrix expected =
      oracle::trace_sites(b0.full() * kron(tm.w_tilde().matrix(), eye(2)), 2, 2) / tm.w_tilde().matrix().trace();
  EXPECT_LT((rep.b_infinity - expected).norm(), 1e-6);
  EXPECT_LT(rep.route_difference, 1e-6);
}

TEST(BInfinity, RoutesAgreeOnSeededModels) {
  random::Engine rng(31);
  for (int k = 0; k < 3; ++k) {
    const TensorModel tm = random::tensor(2, 2, rng);
    const BlockObservable b0(random::hermitian(4, rng).matrix(), 2, 2);
    const MemoryReport rep = b_infinity(tm, b0, convergence_horizon(tm));
    EXPECT_LT(rep.route_difference, 1e-5);
    EXPECT_LT(rep.residual_off_block, 1e-6);
  }
}

TEST(MemoryExpectation, SimpleCasesAndDuality) {
  random::Engine rng(32);
  const DensityMatrix rho(random::density(4, rng));
  EXPECT_LT(std::abs(memory_expectation(rho, eye(2)) - 1.0), 1e-14);
  const ComplexMatrix sigma = random::density(2, rng).matrix();
  const ComplexMatrix b = random::hermitian(2, rng).matrix();
  const DensityMatrix factorized(kron(eye(3) / 3.0, sigma));
  EXPECT_LT(std::abs(memory_expectation(factorized, b) - (sigma * b).trace()), 1e-14);

  const TensorModel tm = random::tensor(2, 2, rng);
  const BlockObservable b0(random::hermitian(4, rng).matrix(), 2, 2);
  const double t = convergence_horizon(tm);
  const MemoryReport rep = b_infinity(tm, b0, t);
  const ComplexMatrix bt = evolve(heisenberg_generator(assemble_model(tm)), b0.full(), t);
  EXPECT_LT(std::abs(memory_expectation(rho, rep.b_infinity) - (bt * rho.matrix()).trace()), 1e-5);
}

TEST(Witness, SeparatesStatesOnlyWithSiteHamiltonian) {
  const BlockObservable b0(kron(eye(2), kSx + kSz), 2, 2);
  const double s = 1 / std::sqrt(2.0);
  const DensityMatrix ra(kron(eye(2) / 2.0, bloch_projector(s, -s)));
  const DensityMatrix rb(kron(eye(2) / 2.0, bloch_projector(-s, s)));

  const TensorModel tm = witness_model(1.0);
  const WitnessResult w = memory_witness(tm, b0, ra, rb, convergence_horizon(tm));
  EXPECT_TRUE(w.certified);
  EXPECT_GT(w.delta, 1e-3);

  const TensorModel flat = witness_model(0.0);
  const WitnessResult w0 = memory_witness(flat, b0, ra, rb, convergence_horizon(flat));
  EXPECT_LE(w0.delta, 1e-8);
  EXPECT_FALSE(w0.certified);

  const WitnessResult same = memory_witness(tm, b0, ra, ra, convergence_horizon(tm));
  EXPECT_EQ(same.delta, 0.0);
}

TEST(Witness, RejectsDifferentSiteMarginals) {
  const TensorModel tm = witness_model(1.0);
  const BlockObservable b0(kron(eye(2), kSz), 2, 2);
  const DensityMatrix ra(kron(diag({1, 0}), eye(2) / 2.0));
  const DensityMatrix rb(kron(diag({0, 1}), eye(2) / 2.0));
  EXPECT_EQ(code_of([&] { memory_witness(tm, b0, ra, rb, 10.0); }), ErrorCode::AssumptionViolated);
}
