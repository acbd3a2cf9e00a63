#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mrdpg/error.hpp"
#include "mrdpg/tensor.hpp"

using namespace mrdpg;

namespace {

// T_{i,j,l} = 4(i-1) + 2(j-1) + l, 1-based.
Tensor3 small_example() {
  Tensor3 t({2, 2, 2});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t l = 0; l < 2; ++l) t(i, j, l) = 4.0 * i + 2.0 * j + (l + 1);
  return t;
}

// Direct evaluation of (t x_mode u)_{...} = sum_k u(a, k) t(..k..).
Tensor3 brute_mode_multiply(const Tensor3& t, int mode, const Matrix& u) {
  Dims3 d = t.dims();
  d[mode - 1] = static_cast<std::size_t>(u.rows());
  Tensor3 out(d);
  for (std::size_t i = 0; i < d[0]; ++i)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t l = 0; l < d[2]; ++l) {
        double acc = 0.0;
        for (std::size_t k = 0; k < t.dim(mode); ++k) {
          if (mode == 1) acc += u(i, k) * t(k, j, l);
          if (mode == 2) acc += u(j, k) * t(i, k, l);
          if (mode == 3) acc += u(l, k) * t(i, j, k);
        }
        out(i, j, l) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("storage offset is row-major in (i, j, l)") {
  Tensor3 t({2, 3, 4});
  t(1, 2, 3) = 7.0;
  CHECK(t.values()[(1 * 3 + 2) * 4 + 3] == 7.0);
  CHECK(t.size() == 24);
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS_AS(Tensor3({0, 2, 2}), ConfigError);
  CHECK_THROWS_AS(Tensor3({2, 2, 2}, std::vector<double>(7, 0.0)), ConfigError);
  CHECK_THROWS_AS(Tensor3({1, 1, 1}, std::vector<double>{NAN}), ConfigError);
}

TEST_CASE("flags validate before they are raised") {
  Tensor3 t({2, 2, 1}, 0.5);
  t.mark_probability();
  CHECK(t.is_probability());
  t(0, 1, 0) = 1.5;
  CHECK_THROWS_AS(t.mark_probability(), ModelError);
  Tensor3 s({2, 2, 1}, 0.0);
  s(0, 1, 0) = 0.3;
  CHECK_THROWS_AS(s.mark_symmetric(), ConfigError);
  s(1, 0, 0) = 0.3;
  s.mark_symmetric();
  CHECK(s.is_symmetric());
  CHECK_THROWS_AS(Tensor3({2, 3, 1}).mark_symmetric(), ConfigError);
}

TEST_CASE("matricize follows the cyclic convention") {
  const Tensor3 t = small_example();
  Matrix m1 = matricize(t, 1);
  Matrix want(2, 4);
  want << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK(m1 == want);
  Matrix m3 = matricize(t, 3);
  CHECK(m3.rows() == 2);
  CHECK(m3(0, 0) == 1);
  CHECK(m3(0, 1) == 3);
  CHECK(m3(0, 2) == 5);
  CHECK(m3(0, 3) == 7);
  Matrix m2 = matricize(t, 2);
  CHECK(m2.rows() == 2);
  CHECK(m2.cols() == 4);
  // mode 2: column (l-1) p1 + i holds T(i, j, l)
  CHECK(m2(1, 1 * 2 + 0) == t(0, 1, 1));
  CHECK_THROWS_AS(matricize(t, 4), ConfigError);
}

TEST_CASE("matricization keeps the Frobenius norm and round-trips") {
  Rng rng = make_rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Tensor3 t = testutil::random_tensor({3, 4, 5}, rng);
    for (int mode = 1; mode <= 3; ++mode) {
      const Matrix m = matricize(t, mode);
      CHECK(m.norm() == doctest::Approx(frobenius_norm(t)).epsilon(1e-14));
      CHECK(dematricize(m, mode, t.dims()) == t);
    }
  }
  CHECK(dematricize(matricize(small_example(), 2), 2, {2, 2, 2}) == small_example());
  CHECK_THROWS_AS(dematricize(Matrix::Zero(3, 3), 1, {2, 2, 2}), ConfigError);
}

TEST_CASE("mode_multiply") {
  Rng rng = make_rng(12);
  const Tensor3 t = testutil::random_tensor({3, 3, 2}, rng);
  SUBCASE("identity is a no-op") {
    for (int mode = 1; mode <= 3; ++mode) {
      const auto n = static_cast<Eigen::Index>(t.dim(mode));
      CHECK(testutil::max_abs_diff(mode_multiply(t, mode, Matrix::Identity(n, n)), t) == 0.0);
    }
  }
  SUBCASE("all-ones row along mode 3 sums the layers") {
    const Tensor3 s = mode_multiply(t, 3, Matrix::Ones(1, 2));
    CHECK(s.dims() == Dims3{3, 3, 1});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(s(i, j, 0) == doctest::Approx(t(i, j, 0) + t(i, j, 1)));
  }
  SUBCASE("matches the defining sum and U * M_s") {
    const Matrix u = testutil::random_matrix(4, 3, rng);
    const Tensor3 got = mode_multiply(t, 1, u);
    CHECK(testutil::max_abs_diff(got, brute_mode_multiply(t, 1, u)) < 1e-12);
    CHECK(testutil::max_abs_diff(got, dematricize(u * matricize(t, 1), 1, got.dims())) < 1e-12);
  }
  SUBCASE("distinct modes commute") {
    const Matrix u = testutil::random_matrix(2, 3, rng);
    const Matrix v = testutil::random_matrix(5, 3, rng);
    const Tensor3 a = mode_multiply(mode_multiply(t, 1, u), 2, v);
    const Tensor3 b = mode_multiply(mode_multiply(t, 2, v), 1, u);
    CHECK(testutil::max_abs_diff(a, b) <= 1e-12 * std::max(1.0, frobenius_norm(a)));
  }
  CHECK_THROWS_AS(mode_multiply(t, 2, Matrix::Identity(4, 4)), ConfigError);
}

TEST_CASE("mode_gram equals M_s M_s^T") {
  Rng rng = make_rng(13);
  const Tensor3 t = testutil::random_tensor({4, 3, 5}, rng);
  for (int mode = 1; mode <= 3; ++mode) {
    const Matrix m = matricize(t, mode);
    CHECK((mode_gram(t, mode) - m * m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("frobenius_norm") {
  CHECK(frobenius_norm(Tensor3({2, 2, 2})) == 0.0);
  Tensor3 one({2, 2, 2});
  one(1, 0, 1) = 3.0;
  CHECK(frobenius_norm(one) == 3.0);
  CHECK(frobenius_norm(Tensor3({2, 2, 2}, 1.0)) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("clamp_unit truncates to [0,1] and is idempotent") {
  Tensor3 t({3, 1, 1});
  t(0, 0, 0) = 1.3;
  t(1, 0, 0) = -0.2;
  t(2, 0, 0) = 0.5;
  const Tensor3 c = clamp_unit(t);
  CHECK(c(0, 0, 0) == 1.0);
  CHECK(c(1, 0, 0) == 0.0);
  CHECK(c(2, 0, 0) == 0.5);
  CHECK(c.is_probability());
  CHECK(clamp_unit(c) == c);
}

TEST_CASE("running_average") {
  Rng rng = make_rng(14);
  SUBCASE("constant stream") {
    const Tensor3 a = testutil::random_tensor({2, 3, 2}, rng);
    PrefixSums ps(a.dims());
    for (int k = 0; k < 6; ++k) ps.push(a);
    CHECK(testutil::max_abs_diff(running_average(ps, 2, 5), a) < 1e-15);
  }
  SUBCASE("zero then one") {
    PrefixSums ps({2, 2, 2});
    ps.push(Tensor3({2, 2, 2}, 0.0));
    ps.push(Tensor3({2, 2, 2}, 1.0));
    const Tensor3 avg = running_average(ps, 0, 2);
    for (double v : avg.values()) CHECK(v == 0.5);
  }
  SUBCASE("matches direct summation") {
    for (std::size_t len : {10u, 50u}) {
      std::vector<Tensor3> stream;
      PrefixSums ps({3, 2, 2});
      for (std::size_t u = 0; u < len; ++u) {
        stream.push_back(testutil::random_tensor({3, 2, 2}, rng, 0.0, 1.0));
        ps.push(stream.back());
      }
      for (std::size_t s = 0; s < len; s += 3)
        for (std::size_t t = s + 1; t <= len; t += 4) {
          Tensor3 direct({3, 2, 2});
          for (std::size_t u = s; u < t; ++u) direct += stream[u];
          direct *= 1.0 / static_cast<double>(t - s);
          const Tensor3 got = running_average(ps, s, t);
          for (std::size_t k = 0; k < got.size(); ++k)
            CHECK(std::abs(got.values()[k] - direct.values()[k]) <= 1e-10 * std::max(1.0, std::abs(direct.values()[k])));
        }
    }
  }
  PrefixSums ps({1, 1, 1});
  ps.push(Tensor3({1, 1, 1}));
  CHECK_THROWS_AS(running_average(ps, 1, 1), ConfigError);
  CHECK_THROWS_AS(running_average(ps, 0, 2), ConfigError);
  CHECK_THROWS_AS(ps.push(Tensor3({2, 1, 1})), ConfigError);
}
