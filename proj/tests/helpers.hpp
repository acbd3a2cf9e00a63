#pragma once

#include <cmath>

#include "mrdpg/models.hpp"
#include "mrdpg/tensor.hpp"

namespace testutil {

inline mrdpg::Tensor3 random_tensor(mrdpg::Dims3 dims, mrdpg::Rng& rng, double lo = -1.0, double hi = 1.0) {
  mrdpg::Tensor3 t(dims);
  for (double& v : t.values()) v = lo + (hi - lo) * mrdpg::uniform01(rng);
  return t;
}

inline mrdpg::Matrix random_matrix(Eigen::Index r, Eigen::Index c, mrdpg::Rng& rng) {
  mrdpg::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = 2.0 * mrdpg::uniform01(rng) - 1.0;
  return m;
}

inline double max_abs_diff(const mrdpg::Tensor3& a, const mrdpg::Tensor3& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

// Largest principal-angle sine between two orthonormal bases.
inline double subspace_distance(const mrdpg::Matrix& a, const mrdpg::Matrix& b) {
  const mrdpg::Matrix proj = a * a.transpose() - b * b.transpose();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(proj).singularValues()(0);
}

}  // namespace testutil
