#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mrdpg {

// Row-major dense matrix; latent positions, weights and matricizations.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Dims3 = std::array<std::size_t, 3>;

/// Dense order-3 tensor with entry (i, j, l) stored at ((i * p2) + j) * p3 + l.
///
/// Two advisory flags travel with the values: `probability` (every entry in
/// [0, 1]) and `symmetric` (p1 == p2 and T(i, j, l) == T(j, i, l)). The
/// setters validate before raising a flag.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims3 dims, double fill = 0.0);
  Tensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  // Extent along a 1-based mode.
  std::size_t dim(int mode) const;
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t l) {
    return values_[(i * dims_[1] + j) * dims_[2] + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t l) const {
    return values_[(i * dims_[1] + j) * dims_[2] + l];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool is_probability() const { return probability_; }
  bool is_symmetric() const { return symmetric_; }
  // Throw ConfigError naming the first offending entry when the check fails.
  void mark_probability();
  void mark_symmetric(double tol = 0.0);
  void clear_flags() { probability_ = symmetric_ = false; }

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double scale);

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  Dims3 dims_{0, 0, 0};
  std::vector<double> values_;
  bool probability_ = false;
  bool symmetric_ = false;
};

Tensor3 operator-(Tensor3 a, const Tensor3& b);

// Mode-s matricization with the cyclic column convention:
//   mode 1: p1 x (p2 p3), column j * p3 + l holds T(i, j, l)
//   mode 2: p2 x (p3 p1), column l * p1 + i holds T(i, j, l)
//   mode 3: p3 x (p1 p2), column i * p2 + j holds T(i, j, l)
Matrix matricize(const Tensor3& t, int mode);
Tensor3 dematricize(const Matrix& m, int mode, const Dims3& dims);

// Marginal multiplication t x_mode u; u is q x dims[mode].
Tensor3 mode_multiply(const Tensor3& t, int mode, const Matrix& u);

// M_s(t) * M_s(t)^T without forming the matricization.
Matrix mode_gram(const Tensor3& t, int mode);

double frobenius_norm(const Tensor3& t);

// Entrywise min(max(x, 0), 1); the result carries the probability flag.
Tensor3 clamp_unit(Tensor3 t);

/// Cumulative sums S(0) = 0, S(u) = A(1) + ... + A(u) of a tensor stream.
class PrefixSums {
 public:
  explicit PrefixSums(Dims3 dims);

  void push(const Tensor3& a);
  // Number of tensors ingested so far.
  std::size_t length() const { return sums_.size() - 1; }
  const Dims3& dims() const { return dims_; }
  const Tensor3& sum(std::size_t u) const { return sums_.at(u); }

 private:
  Dims3 dims_;
  std::vector<Tensor3> sums_;
};

// Mean of A(s+1), ..., A(t); requires 0 <= s < t <= prefix.length().
Tensor3 running_average(const PrefixSums& prefix, std::size_t s, std::size_t t);

}  // namespace mrdpg
