#include "lindbladlab/occupation_basis.hpp"

#include <cmath>
#include <map>
#include <string>

namespace lindblad {

namespace {

void enumerate_into(int mode, int remaining, Occupation& current, std::vector<Occupation>& out) {
  const int d = static_cast<int>(current.size());
  if (mode == d - 1) {
    current[mode] = remaining;
    out.push_back(current);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[mode] = k;
    enumerate_into(mode + 1, remaining - k, current, out);
  }
}

}  // namespace

std::vector<Occupation> enumerate_occupations(int d, int J) {
  if (d < 1 || J < 0) raise(ErrorCode::InvalidArgument, "occupations need d >= 1 and J >= 0");
  std::vector<Occupation> out;
  Occupation current(d, 0);
  enumerate_into(0, J, current, out);
  return out;
}

std::size_t symmetric_dimension(int d, int J) {
  // binomial(J + d - 1, d - 1) built incrementally; every partial product is integral.
  std::size_t result = 1;
  for (int k = 1; k < d; ++k) result = result * static_cast<std::size_t>(J + k) / static_cast<std::size_t>(k);
  return result;
}

std::size_t product_dimension(int d, int J, std::size_t cap) {
  std::size_t p = 1;
  for (int k = 0; k < J; ++k) {
    p *= static_cast<std::size_t>(d);
    if (p > cap) return cap + 1;
  }
  return p;
}

OccupationBasis::OccupationBasis(int d, int J, std::size_t cap) : d_(d), J_(J) {
  if (d < 1 || J < 0) raise(ErrorCode::InvalidArgument, "symmetric basis needs d >= 1 and J >= 0");
  const std::size_t dim = product_dimension(d, J, cap);
  if (dim > cap)
    raise(ErrorCode::CapExceeded, "d^J exceeds the dense cap of " + std::to_string(cap));

  occupations_ = enumerate_occupations(d, J);
  std::map<Occupation, Index> column;
  for (std::size_t i = 0; i < occupations_.size(); ++i) column[occupations_[i]] = static_cast<Index>(i);

  isometry_ = ComplexMatrix::Zero(static_cast<Index>(dim), static_cast<Index>(occupations_.size()));
  std::vector<int> count(occupations_.size(), 0);
  Occupation occ(d, 0);
  for (std::size_t p = 0; p < dim; ++p) {
    std::fill(occ.begin(), occ.end(), 0);
    std::size_t rest = p;
    for (int k = 0; k < J; ++k) {
      ++occ[rest % static_cast<std::size_t>(d)];
      rest /= static_cast<std::size_t>(d);
    }
    const Index c = column.at(occ);
    isometry_(static_cast<Index>(p), c) = 1.0;
    ++count[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < count.size(); ++c)
    isometry_.col(static_cast<Index>(c)) /= std::sqrt(static_cast<double>(count[c]));
}

}  // namespace lindblad
