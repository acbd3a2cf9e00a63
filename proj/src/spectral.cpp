#include "mrdpg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mrdpg/error.hpp"

namespace mrdpg {

namespace {

// Flip column k of u (and v when given) so that its largest-magnitude entry is positive.
void normalise_signs(Matrix& u, Matrix* v) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, k)) > best) {
        best = std::abs(u(i, k));
        arg = i;
      }
    }
    if (u(arg, k) < 0.0) {
      u.col(k) *= -1.0;
      if (v != nullptr) v->col(k) *= -1.0;
    }
  }
}

// Eigenpairs of a symmetric matrix, ordered by decreasing lambda or, with
// by_magnitude, by decreasing |lambda| (the SVD ordering: sigma = |lambda|,
// v = sign(lambda) u).
struct SymmetricSpectrum {
  Vector lambda;
  Matrix vectors;
};

SymmetricSpectrum symmetric_spectrum(const Matrix& m, bool by_magnitude) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge");
  }
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& ev = solver.eigenvalues();
  // Ascending input; walk from the top so equal magnitudes keep the larger value first.
  std::reverse(order.begin(), order.end());
  if (by_magnitude) {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(ev(a)) > std::abs(ev(b));
    });
  }
  SymmetricSpectrum out;
  out.lambda.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.lambda(k) = ev(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ConfigError(std::string(what) + ": non-finite entries");
}

Matrix leading_eigenvectors(const Matrix& gram, int r) {
  SymmetricSpectrum spec = symmetric_spectrum(gram, false);
  Matrix basis = spec.vectors.leftCols(r);
  normalise_signs(basis, nullptr);
  return basis;
}

// Diagonal of the best rank-r approximation.
Vector rank_r_diagonal_symmetric(const SymmetricSpectrum& spec, int r) {
  const Eigen::Index n = spec.vectors.rows();
  Vector d = Vector::Zero(n);
  for (int k = 0; k < r; ++k) {
    d += spec.lambda(k) * spec.vectors.col(k).cwiseAbs2();
  }
  return d;
}

Vector rank_r_diagonal_general(const SvdFactors& f, int r) {
  Vector d = Vector::Zero(f.u.rows());
  for (int k = 0; k < r; ++k) {
    d += f.sigma(k) * f.u.col(k).cwiseProduct(f.v.col(k));
  }
  return d;
}

constexpr int kMaxSweeps = 30;
constexpr double kDiagonalTol = 1e-12;

double relative_change(const Vector& before, const Vector& after) {
  const double scale = std::max(after.norm(), std::numeric_limits<double>::min());
  return (after - before).norm() / scale;
}

// Exact symmetry in the first two modes; then M_1 M_1^T = M_2 M_2^T.
bool symmetric_layers(const Tensor3& a) {
  const auto [p1, p2, p3] = a.dims();
  if (p1 != p2) return false;
  for (std::size_t i = 0; i < p1; ++i)
    for (std::size_t j = i + 1; j < p2; ++j)
      for (std::size_t l = 0; l < p3; ++l)
        if (a(i, j, l) != a(j, i, l)) return false;
  return true;
}

}  // namespace

void validate_ranks(const TuckerRanks& ranks, const Dims3& dims) {
  for (int mode = 1; mode <= 3; ++mode) {
    const int r = ranks[mode];
    if (r < 1 || static_cast<std::size_t>(r) > dims[static_cast<std::size_t>(mode - 1)]) {
      throw ConfigError("Tucker rank r" + std::to_string(mode) + " = " + std::to_string(r) +
                        " outside [1, " + std::to_string(dims[mode - 1]) + "]");
    }
  }
}

TuckerRanks default_ranks(const Dims3& dims) {
  const auto cap = [](std::size_t p) { return static_cast<int>(std::min<std::size_t>(10, p)); };
  return {cap(dims[0]), cap(dims[1]), cap(dims[2])};
}

SvdFactors svd(const Matrix& m) {
  check_finite(m, "svd");
  if (m.rows() == 0 || m.cols() == 0) throw ConfigError("svd: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) throw NumericError("svd did not converge");
  SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  normalise_signs(f.u, &f.v);
  return f;
}

Matrix best_rank_r(const Matrix& m, int r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  if (r < 1 || r > k) {
    throw ConfigError("best_rank_r: rank " + std::to_string(r) + " outside [1, " +
                      std::to_string(k) + "]");
  }
  const SvdFactors f = svd(m);
  return f.u.leftCols(r) * f.sigma.head(r).asDiagonal() * f.v.leftCols(r).transpose();
}

int hpca_iteration_count(double sigma_r, std::size_t n) {
  const double ratio = std::max(sigma_r / static_cast<double>(n), std::exp(1.0));
  const double raw = std::ceil(5.0 * std::log(ratio));
  return static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(kMaxSweeps)));
}

HpcaResult hpca(const Matrix& sigma, int r) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw ConfigError("hpca: input must be a non-empty square matrix");
  }
  check_finite(sigma, "hpca");
  const Eigen::Index n = sigma.rows();
  if (r < 1 || r > n) {
    throw ConfigError("hpca: rank " + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
  }

  Matrix current = sigma;
  current.diagonal().setZero();

  HpcaResult result;
  if (current.cwiseAbs().maxCoeff() == 0.0) {
    result.basis = Matrix::Identity(n, r);
    result.degenerate = true;
    return result;
  }

  if (is_symmetric(sigma)) {
    // Deleting the diagonal of a Gram matrix pushes eigenvalues of size
    // ~diag(sigma) below zero; the low-rank step keeps the r largest
    // eigenvalues so those never displace weak positive signal directions.
    const SymmetricSpectrum start = symmetric_spectrum(current, true);
    const int min_sweeps =
        hpca_iteration_count(std::abs(start.lambda(r - 1)), static_cast<std::size_t>(n));
    SymmetricSpectrum spec = symmetric_spectrum(current, false);
    while (result.iterations < kMaxSweeps) {
      const Vector next = rank_r_diagonal_symmetric(spec, r);
      const double change = relative_change(current.diagonal(), next);
      current.diagonal() = next;
      spec = symmetric_spectrum(current, false);
      ++result.iterations;
      if (result.iterations >= min_sweeps && change <= kDiagonalTol) break;
    }
    result.basis = spec.vectors.leftCols(r);
    normalise_signs(result.basis, nullptr);
    return result;
  }

  SvdFactors f = svd(current);
  const int min_sweeps = hpca_iteration_count(f.sigma(r - 1), static_cast<std::size_t>(n));
  while (result.iterations < kMaxSweeps) {
    const Vector next = rank_r_diagonal_general(f, r);
    const double change = relative_change(current.diagonal(), next);
    current.diagonal() = next;
    f = svd(current);
    ++result.iterations;
    if (result.iterations >= min_sweeps && change <= kDiagonalTol) break;
  }
  result.basis = f.u.leftCols(r);
  return result;
}

Tensor3 project_tucker(const Tensor3& a, const Matrix& u1, const Matrix& u2, const Matrix& u3) {
  Tensor3 core = mode_multiply(a, 1, u1.transpose());
  core = mode_multiply(core, 2, u2.transpose());
  core = mode_multiply(core, 3, u3.transpose());
  Tensor3 out = mode_multiply(core, 1, u1);
  out = mode_multiply(out, 2, u2);
  return mode_multiply(out, 3, u3);
}

bool diagonal_identifiable(std::size_t n, int r) {
  const std::size_t gap = n - static_cast<std::size_t>(r);
  return gap * (gap + 1) / 2 >= n;
}

Tensor3 thpca(const Tensor3& a, const TuckerRanks& ranks) {
  validate_ranks(ranks, a.dims());
  const bool reuse = ranks.r1 == ranks.r2 && symmetric_layers(a);
  Matrix bases[3];
  for (int mode = 1; mode <= 3; ++mode) {
    if (mode == 2 && reuse) {
      bases[1] = bases[0];
      continue;
    }
    const Matrix gram = mode_gram(a, mode);
    const std::size_t n = a.dim(mode);
    // A full-rank mode projects onto everything; a mode whose diagonal cannot
    // be recovered from its off-diagonal keeps the observed Gram diagonal.
    if (static_cast<std::size_t>(ranks[mode]) == n) {
      bases[mode - 1] = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    } else if (!diagonal_identifiable(n, ranks[mode])) {
      bases[mode - 1] = leading_eigenvectors(gram, ranks[mode]);
    } else {
      bases[mode - 1] = hpca(gram, ranks[mode]).basis;
    }
  }
  return clamp_unit(project_tucker(a, bases[0], bases[1], bases[2]));
}

Tensor3 hosvd_project(const Tensor3& a, const TuckerRanks& ranks) {
  validate_ranks(ranks, a.dims());
  const bool reuse = ranks.r1 == ranks.r2 && symmetric_layers(a);
  Matrix bases[3];
  for (int mode = 1; mode <= 3; ++mode) {
    bases[mode - 1] = mode == 2 && reuse ? bases[0] : leading_eigenvectors(mode_gram(a, mode), ranks[mode]);
  }
  return clamp_unit(project_tucker(a, bases[0], bases[1], bases[2]));
}

Tensor3 hosvd_rank1(const Tensor3& a) { return hosvd_project(a, {1, 1, 1}); }

}  // namespace mrdpg
