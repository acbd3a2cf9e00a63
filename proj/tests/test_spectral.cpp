#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mrdpg/error.hpp"
#include "mrdpg/spectral.hpp"

using namespace mrdpg;

namespace {

double orth_error(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Noiseless P(i,j,l) = x_i^T W_l x_j with W_l = a_l B1 + b_l B2, Tucker ranks (d, d, 2).
Tensor3 planted_tensor(std::size_t n, std::size_t L, Rng& rng) {
  const int d = 2;
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.1 + 0.8 * uniform01(rng);
    x(static_cast<Eigen::Index>(i), 0) = w;
    x(static_cast<Eigen::Index>(i), 1) = 1.0 - w;
  }
  Matrix b1(2, 2), b2(2, 2);
  b1 << 0.8, 0.3, 0.3, 0.6;
  b2 << 0.2, 0.5, 0.5, 0.3;
  Tensor3 p({n, n, L});
  for (std::size_t l = 0; l < L; ++l) {
    const double a = 0.2 + 0.6 * uniform01(rng);
    const Matrix w = a * b1 + (1.0 - a) * b2;
    const Matrix layer = x * w * x.transpose();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j, l) = layer(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return p;
}

}  // namespace

TEST_CASE("svd examples") {
  SvdFactors id = svd(Matrix::Identity(3, 3));
  CHECK(id.sigma.isApprox(Vector::Ones(3)));
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  CHECK((svd(d).sigma - Eigen::Vector3d(3, 2, 1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("svd invariants on random matrices") {
  Rng rng = make_rng(31);
  for (auto [r, c] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{6, 6}, std::pair{1, 4}}) {
    const Matrix m = testutil::random_matrix(r, c, rng);
    const SvdFactors f = svd(m);
    CHECK(orth_error(f.u) < 1e-10);
    CHECK(orth_error(f.v) < 1e-10);
    for (Eigen::Index k = 1; k < f.sigma.size(); ++k) CHECK(f.sigma(k - 1) >= f.sigma(k));
    CHECK(f.sigma.minCoeff() >= 0.0);
    const Matrix back = f.u * f.sigma.asDiagonal() * f.v.transpose();
    CHECK((back - m).norm() < 1e-8 * m.norm());
    for (Eigen::Index k = 0; k < f.u.cols(); ++k) {
      Eigen::Index at = 0;
      f.u.col(k).cwiseAbs().maxCoeff(&at);
      CHECK(f.u(at, k) > 0.0);
    }
  }
  CHECK_THROWS_AS(svd(Matrix::Constant(2, 2, NAN)), ConfigError);
}

TEST_CASE("svd is deterministic") {
  Rng rng = make_rng(32);
  const Matrix m = testutil::random_matrix(7, 4, rng);
  const SvdFactors a = svd(m), b = svd(m);
  CHECK(a.u == b.u);
  CHECK(a.sigma == b.sigma);
  CHECK(a.v == b.v);
}

TEST_CASE("best_rank_r") {
  Rng rng = make_rng(33);
  const Matrix m = testutil::random_matrix(4, 4, rng);
  CHECK((best_rank_r(m, 4) - m).norm() < 1e-8);
  const Vector u = Vector::LinSpaced(5, 1, 5);
  const Vector v = Vector::LinSpaced(3, -1, 1);
  const Matrix one = u * v.transpose();
  CHECK((best_rank_r(one, 1) - one).norm() < 1e-10);
  const Vector s = svd(m).sigma;
  CHECK((best_rank_r(m, 2) - m).norm() == doctest::Approx(std::hypot(s(2), s(3))).epsilon(1e-8));
  CHECK_THROWS_AS(best_rank_r(m, 0), ConfigError);
  CHECK_THROWS_AS(best_rank_r(m, 5), ConfigError);
}

TEST_CASE("hpca recovers a rank-1 Gram direction") {
  const Vector u = Vector::Ones(3) / std::sqrt(3.0);
  const HpcaResult res = hpca(u * u.transpose(), 1);
  CHECK_FALSE(res.degenerate);
  CHECK(std::abs(res.basis.col(0).dot(u)) > 1.0 - 1e-6);
}

TEST_CASE("hpca flags the all-diagonal input as degenerate") {
  const HpcaResult res = hpca(Matrix::Identity(4, 4), 2);
  CHECK(res.degenerate);
  CHECK(res.basis == Matrix::Identity(4, 2));
  CHECK_THROWS_AS(hpca(Matrix::Identity(3, 3), 4), ConfigError);
  CHECK_THROWS_AS(hpca(Matrix::Identity(3, 2), 1), ConfigError);
}

TEST_CASE("hpca beats plain SVD on heteroskedastic diagonal noise") {
  Rng rng = make_rng(34);
  std::vector<double> dist_hpca, dist_svd;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix basis = svd(testutil::random_matrix(20, 2, rng)).u;
    const Matrix coords = testutil::random_matrix(2, 30, rng) * 3.0;
    const Matrix pts = basis * coords;
    Matrix gram = pts * pts.transpose();
    for (Eigen::Index i = 0; i < 20; ++i) gram(i, i) += 40.0 * uniform01(rng) * uniform01(rng);
    dist_hpca.push_back(testutil::subspace_distance(hpca(gram, 2).basis, basis));
    dist_svd.push_back(testutil::subspace_distance(svd(gram).u.leftCols(2), basis));
  }
  CHECK(median(dist_hpca) < median(dist_svd));
}

TEST_CASE("hpca ignores a constant shift of the diagonal") {
  Rng rng = make_rng(35);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix f = testutil::random_matrix(12, 3, rng);
    const Matrix gram = f * f.transpose();
    const Matrix shifted = gram + 5.0 * Matrix::Identity(12, 12);
    CHECK(testutil::subspace_distance(hpca(gram, 3).basis, hpca(shifted, 3).basis) < 1e-6);
  }
}

TEST_CASE("identifiability guard") {
  CHECK(diagonal_identifiable(10, 2));
  CHECK_FALSE(diagonal_identifiable(4, 2));
  CHECK_FALSE(diagonal_identifiable(3, 3));
  CHECK(diagonal_identifiable(25, 10));
}

TEST_CASE("default ranks") {
  CHECK(default_ranks({50, 40, 4}) == TuckerRanks{10, 10, 4});
  CHECK_THROWS_AS(validate_ranks({1, 1, 5}, {3, 3, 4}), ConfigError);
  CHECK_THROWS_AS(validate_ranks({0, 1, 1}, {3, 3, 4}), ConfigError);
}

TEST_CASE("thpca recovers a noiseless low-rank probability tensor") {
  Rng rng = make_rng(36);
  for (int rep = 0; rep < 5; ++rep) {
    const Tensor3 p = planted_tensor(20, 4, rng);
    const Tensor3 got = thpca(p, {2, 2, 2});
    CHECK(frobenius_norm(got - p) < 1e-6);
    CHECK(got.is_probability());
  }
}

TEST_CASE("thpca fixes the constant tensor") {
  const Tensor3 half({4, 4, 3}, 0.5);
  CHECK(testutil::max_abs_diff(thpca(half, {1, 1, 1}), half) < 1e-12);
  CHECK_THROWS_AS(thpca(half, {5, 1, 1}), ConfigError);
}

TEST_CASE("thpca denoises SBM adjacency tensors") {
  int wins = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng = make_rng(trial_seed(37, trial));
    const Tensor3 p = gen_sbm_prob(50, 10, 4, rng);
    const Tensor3 a = sample_adjacency(p, true, rng);
    if (frobenius_norm(thpca(a, {10, 10, 10}) - p) < frobenius_norm(a - p)) ++wins;
  }
  CHECK(wins >= 45);
}

TEST_CASE("estimator outputs stay in [0,1]") {
  Rng rng = make_rng(38);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor3 a = testutil::random_tensor({6, 5, 3}, rng, -0.5, 1.5);
    for (const Tensor3& out : {thpca(a, {2, 2, 2}), hosvd_rank1(a), hosvd_project(a, {3, 3, 2})}) {
      for (double v : out.values()) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
}

TEST_CASE("hosvd_rank1") {
  SUBCASE("rank-one tensor is a fixed point") {
    Vector u(3), v(4), w(2);
    u << 0.5, 0.7, 0.2;
    v << 0.1, 0.9, 0.3, 0.4;
    w << 0.6, 0.8;
    u.normalize();
    v.normalize();
    Tensor3 a({3, 4, 2});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t l = 0; l < 2; ++l)
          a(i, j, l) = u(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(j)) * w(static_cast<Eigen::Index>(l));
    CHECK(frobenius_norm(hosvd_rank1(a) - a) < 1e-8);
  }
  SUBCASE("zero tensor") {
    const Tensor3 z({3, 3, 2});
    CHECK(hosvd_rank1(z) == z);
  }
  SUBCASE("projection above one is clamped") {
    Tensor3 a({2, 2, 1}, 1.0);
    a(1, 1, 0) = 0.0;
    CHECK(hosvd_rank1(a)(0, 0, 0) == 1.0);
  }
  SUBCASE("hosvd_project with unit ranks") {
    Rng rng = make_rng(39);
    const Tensor3 a = testutil::random_tensor({4, 4, 3}, rng, 0.0, 1.0);
    CHECK(hosvd_rank1(a) == hosvd_project(a, {1, 1, 1}));
  }
}

TEST_CASE("estimators are deterministic") {
  Rng rng = make_rng(40);
  const Tensor3 a = sample_adjacency(gen_sbm_prob(20, 3, 2, rng), true, rng);
  CHECK(thpca(a, {4, 4, 3}) == thpca(a, {4, 4, 3}));
  CHECK(hosvd_rank1(a) == hosvd_rank1(a));
}
