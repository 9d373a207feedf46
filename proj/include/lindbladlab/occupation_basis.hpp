#pragma once

#include <cstddef>
#include <vector>

#include "lindbladlab/types.hpp"

namespace lindblad {

using Occupation = std::vector<int>;

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Occupation-number basis of the symmetric subspace of (C^d)^{(x) J}.
///
/// Occupations are listed in lexicographically descending order, e.g. for
/// d = 2, J = 2: (2,0), (1,1), (0,2). The isometry maps each occupation to the
/// normalized symmetric product state in the d^J product space, where the
/// first tensor factor is the most significant digit of the product index.
class OccupationBasis {
 public:
  OccupationBasis(int d, int J, std::size_t cap = kDefaultDenseCap);

  int internal_dim() const noexcept { return d_; }
  int particle_number() const noexcept { return J_; }
  std::size_t size() const noexcept { return occupations_.size(); }
  Index product_dim() const noexcept { return isometry_.rows(); }

  const std::vector<Occupation>& occupations() const noexcept { return occupations_; }
  const Occupation& occupation(std::size_t i) const { return occupations_.at(i); }

  /// d^J x size() matrix with orthonormal columns spanning the symmetric subspace.
  const ComplexMatrix& isometry() const noexcept { return isometry_; }

  /// Orthogonal projector onto the symmetric subspace.
  ComplexMatrix symmetrizer() const { return isometry_ * isometry_.adjoint(); }

 private:
  int d_;
  int J_;
  std::vector<Occupation> occupations_;
  ComplexMatrix isometry_;
};

/// Occupation vectors with sum J over d modes, lexicographically descending.
std::vector<Occupation> enumerate_occupations(int d, int J);

/// binomial(J + d - 1, d - 1), the dimension of the symmetric subspace.
std::size_t symmetric_dimension(int d, int J);

/// d^J, or cap + 1 if it would exceed cap.
std::size_t product_dimension(int d, int J, std::size_t cap);

inline OccupationBasis symmetric_basis(int d, int J, std::size_t cap = kDefaultDenseCap) {
  return OccupationBasis(d, J, cap);
}

}  // namespace lindblad
