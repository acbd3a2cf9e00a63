#pragma once

#include "mrdpg/tensor.hpp"

namespace mrdpg {

/// Thin SVD m = u * diag(sigma) * v^T with sigma nonincreasing.
///
/// Each singular pair is sign-normalised so that the entry of largest
/// magnitude in the u column is positive (first such entry on ties).
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;
};

struct TuckerRanks {
  int r1 = 1;
  int r2 = 1;
  int r3 = 1;

  int operator[](int mode) const { return mode == 1 ? r1 : (mode == 2 ? r2 : r3); }
  friend bool operator==(const TuckerRanks&, const TuckerRanks&) = default;
};

// Throws ConfigError when any rank is outside [1, dims[s]].
void validate_ranks(const TuckerRanks& ranks, const Dims3& dims);

// (min(10, p1), min(10, p2), min(10, p3)).
TuckerRanks default_ranks(const Dims3& dims);

SvdFactors svd(const Matrix& m);

// Sum of the r leading singular triplets of m.
Matrix best_rank_r(const Matrix& m, int r);

struct HpcaResult {
  Matrix basis;           // n x r, orthonormal columns
  bool degenerate = false;  // the zero-diagonal initialiser was identically zero
  int iterations = 0;      // sweeps performed
};

/// Heteroskedastic PCA with diagonal imputation.
///
/// The diagonal of `sigma` is discarded and re-estimated by repeatedly copying
/// in the diagonal of the current best rank-r approximation. At least
/// clamp(ceil(5 ln(max(s_r / n, e))), 1, 30) sweeps run, s_r being the r-th
/// singular value of the zero-diagonal start; sweeping continues until the
/// imputed diagonal is stationary (relative change <= 1e-12) or 30 sweeps.
///
/// Symmetric input is treated as a Gram matrix: the rank-r step keeps the r
/// largest eigenvalues. Other square input uses the SVD.
HpcaResult hpca(const Matrix& sigma, int r);
int hpca_iteration_count(double sigma_r, std::size_t n);

// True when a generic rank-r symmetric n x n matrix is determined by its
// off-diagonal entries: (n - r)(n - r + 1) / 2 >= n.
bool diagonal_identifiable(std::size_t n, int r);

// Diagonal-imputed Tucker projection followed by truncation to [0,1].
Tensor3 thpca(const Tensor3& a, const TuckerRanks& ranks);

// Plain truncated HOSVD: projection onto the leading eigenvectors of each
// mode Gram matrix, no diagonal imputation, then truncation to [0,1].
Tensor3 hosvd_project(const Tensor3& a, const TuckerRanks& ranks);

// hosvd_project with unit ranks.
Tensor3 hosvd_rank1(const Tensor3& a);

// a x_1 U1 U1^T x_2 U2 U2^T x_3 U3 U3^T, evaluated through the core tensor.
Tensor3 project_tucker(const Tensor3& a, const Matrix& u1, const Matrix& u2, const Matrix& u3);

}  // namespace mrdpg
