#include "lindbladlab/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lindblad::random {

ComplexMatrix gaussian(Index rows, Index cols, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index k = 0; k < cols; ++k)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, k) = cdouble(re, im);
    }
  return m;
}

HermitianMatrix hermitian(Index d, Engine& rng) {
  const ComplexMatrix g = gaussian(d, d, rng);
  return HermitianMatrix(hermitize<double>(g) / std::sqrt(2.0 * static_cast<double>(d)));
}

UnitaryMatrix unitary(Index d, Engine& rng) {
  const ComplexMatrix g = gaussian(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    const cdouble diag = r(k, k);
    if (std::abs(diag) > 0) q.col(k) *= diag / std::abs(diag);
  }
  return UnitaryMatrix(std::move(q));
}

namespace {

ComplexMatrix with_spectrum(const ComplexMatrix& basis, const RealVector<double>& spectrum) {
  return hermitize<double>(basis * spectrum.cast<cdouble>().asDiagonal() * basis.adjoint());
}

RealVector<double> uniform_spectrum(Index d, Engine& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uniform(lo, hi);
  RealVector<double> s(d);
  for (Index i = 0; i < d; ++i) s(i) = uniform(rng);
  return s;
}

// One point per equal subinterval of [lo, hi], so neighbours stay apart.
RealVector<double> spread_spectrum(Index d, Engine& rng, double lo, double hi) {
  std::uniform_real_distribution<double> jitter(0.25, 0.75);
  const double width = (hi - lo) / static_cast<double>(d);
  RealVector<double> s(d);
  for (Index i = 0; i < d; ++i) s(i) = lo + width * (static_cast<double>(i) + jitter(rng));
  return s;
}

}  // namespace

PositiveMatrix positive_definite(Index d, Engine& rng, double lo, double hi) {
  const UnitaryMatrix q = unitary(d, rng);
  return PositiveMatrix(with_spectrum(q.matrix(), uniform_spectrum(d, rng, lo, hi)));
}

DensityMatrix density(Index d, Engine& rng) {
  const ComplexMatrix g = gaussian(d, d, rng);
  const ComplexMatrix rho = hermitize<double>(g * g.adjoint());
  return DensityMatrix(rho / rho.trace().real());
}

ComplexMatrix invertible(Index d, Engine& rng) {
  for (;;) {
    ComplexMatrix g = gaussian(d, d, rng);
    if (inverse_condition<double>(g) > 1e-3) return g;
  }
}

SingleModel irreducible_from_W(Index d, Engine& rng) {
  const UnitaryMatrix q = unitary(d, rng);
  const RealVector<double> energies = uniform_spectrum(d, rng, -1.0, 1.0);
  const RealVector<double> weights = uniform_spectrum(d, rng, 0.5, 2.0);
  HermitianMatrix h(with_spectrum(q.matrix(), energies));
  PositiveMatrix w(with_spectrum(q.matrix(), weights));
  const UnitaryMatrix u = unitary(d, rng);
  ComplexMatrix v = build_V_from_W(w, u);
  return {LindbladModel(std::move(h), {std::move(v)}), std::move(w)};
}

BlockModel block_reducible(const std::vector<Index>& block_dims, Engine& rng) {
  if (block_dims.empty()) raise(ErrorCode::InvalidArgument, "need at least one block");
  const Index d = std::accumulate(block_dims.begin(), block_dims.end(), Index{0});
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  ComplexMatrix v = ComplexMatrix::Zero(d, d);
  ComplexMatrix w = ComplexMatrix::Zero(d, d);
  std::vector<ComplexMatrix> projectors;
  Index offset = 0;
  for (const Index b : block_dims) {
    SingleModel block = irreducible_from_W(b, rng);
    h.block(offset, offset, b, b) = block.model.hamiltonian().matrix();
    v.block(offset, offset, b, b) = block.model.lindblad_ops().front();
    w.block(offset, offset, b, b) = block.w.matrix();
    ComplexMatrix p = ComplexMatrix::Zero(d, d);
    p.block(offset, offset, b, b).setIdentity();
    projectors.push_back(std::move(p));
    offset += b;
  }
  return {LindbladModel(HermitianMatrix(std::move(h)), {std::move(v)}), PositiveMatrix(std::move(w)),
          std::move(projectors)};
}

LindbladModel positive_multi(Index d, int n_ops, Engine& rng) {
  const UnitaryMatrix q = unitary(d, rng);
  HermitianMatrix h(with_spectrum(q.matrix(), uniform_spectrum(d, rng, -1.0, 1.0)));
  std::vector<ComplexMatrix> ops;
  for (int j = 0; j < n_ops; ++j) ops.push_back(with_spectrum(q.matrix(), uniform_spectrum(d, rng, 0.5, 1.5)));
  return LindbladModel(std::move(h), std::move(ops));
}

LindbladModel equal_w_multi(Index d, int n_ops, Engine& rng) {
  const UnitaryMatrix q = unitary(d, rng);
  HermitianMatrix h(with_spectrum(q.matrix(), uniform_spectrum(d, rng, -1.0, 1.0)));
  const PositiveMatrix w(with_spectrum(q.matrix(), uniform_spectrum(d, rng, 0.5, 2.0)));
  std::vector<ComplexMatrix> ops;
  for (int j = 0; j < n_ops; ++j) ops.push_back(build_V_from_W(w, unitary(d, rng)));
  return LindbladModel(std::move(h), std::move(ops));
}

TensorModel tensor(Index m, Index n, Engine& rng) {
  // distinct W eigenvalues make any matrix diagonal in its eigenbasis a polynomial in W
  const UnitaryMatrix q = unitary(m, rng);
  const PositiveMatrix wt(with_spectrum(q.matrix(), spread_spectrum(m, rng, 0.5, 2.0)));
  // jumps spread each W eigenvector evenly over all of them
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  ComplexMatrix fourier(m, m);
  for (Index k = 0; k < m; ++k) {
    const double phase = angle(rng);
    for (Index j = 0; j < m; ++j)
      fourier(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(m)),
                                 2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(m) + phase);
  }
  const UnitaryMatrix ut(q.matrix() * fourier * q.matrix().adjoint());
  ComplexMatrix vt = build_V_from_W(wt, ut);
  RealVector<double> site_energies = spread_spectrum(m, rng, -1.0, 1.0);
  std::shuffle(site_energies.begin(), site_energies.end(), rng);
  HermitianMatrix ht(with_spectrum(q.matrix(), site_energies));
  HermitianMatrix hint(with_spectrum(unitary(n, rng).matrix(), spread_spectrum(n, rng, -1.0, 1.0)));
  return TensorModel(std::move(vt), std::move(ht), std::move(hint));
}

BoseModel bose(Index d, double beta, Engine& rng) {
  const UnitaryMatrix q = unitary(d, rng);
  const RealVector<double> energies = uniform_spectrum(d, rng, 0.5 / beta, 2.0 / beta);
  return BoseModel(HermitianMatrix(with_spectrum(q.matrix(), energies)), beta);
}

}  // namespace lindblad::random
