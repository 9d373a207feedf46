#pragma once

// Seeded generators for test and CLI models. Every draw goes through one
// std::mt19937_64, so a seed fixes the output on a given toolchain.

#include <cstdint>
#include <random>
#include <string>

#include "lindbladlab/bose.hpp"
#include "lindbladlab/lindblad.hpp"
#include "lindbladlab/memory.hpp"

namespace lindblad::random {

using Engine = std::mt19937_64;

/// Entries with independent standard normal real and imaginary parts.
ComplexMatrix gaussian(Index rows, Index cols, Engine& rng);

HermitianMatrix hermitian(Index d, Engine& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phases fixed).
UnitaryMatrix unitary(Index d, Engine& rng);

/// Q diag(lambda) Q^H with lambda uniform in [lo, hi] and Q Haar.
PositiveMatrix positive_definite(Index d, Engine& rng, double lo = 0.5, double hi = 2.0);

DensityMatrix density(Index d, Engine& rng);

/// Gaussian matrix with sigma_min / sigma_max above 1e-3.
ComplexMatrix invertible(Index d, Engine& rng);

/// H and W share an eigenbasis; V = U W^{-1/2} with U Haar.
struct SingleModel {
  LindbladModel model;
  PositiveMatrix w;
};
SingleModel irreducible_from_W(Index d, Engine& rng);

/// Direct sum of independent irreducible blocks of the given sizes.
struct BlockModel {
  LindbladModel model;
  PositiveMatrix w;
  std::vector<ComplexMatrix> projectors;
};
BlockModel block_reducible(const std::vector<Index>& block_dims, Engine& rng);

/// N positive V_J, all functions of H.
LindbladModel positive_multi(Index d, int n_ops, Engine& rng);

/// N operators V_J = U_J W^{-1/2} with one shared W commuting with H.
LindbladModel equal_w_multi(Index d, int n_ops, Engine& rng);

/// Ht is a polynomial a Wt + b Wt^2 so that [Wt, Ht] = 0 holds exactly up to rounding.
TensorModel tensor(Index m, Index n, Engine& rng);

/// H with spectrum uniform in [0.5, 2] / beta in a Haar basis.
BoseModel bose(Index d, double beta, Engine& rng);

}  // namespace lindblad::random
