#include "mrdpg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrdpg/error.hpp"

namespace mrdpg {

namespace {

using RowMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const Matrix>;

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw ConfigError("invalid mode " + std::to_string(mode) + " (expected 1, 2 or 3)");
  }
}

void check_same_dims(const Tensor3& a, const Tensor3& b, const char* what) {
  if (a.dims() != b.dims()) throw ConfigError(std::string(what) + ": tensor dimensions differ");
}

std::string index_string(std::size_t i, std::size_t j, std::size_t l) {
  return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
         std::to_string(l + 1) + ")";
}

}  // namespace

Tensor3::Tensor3(Dims3 dims, double fill)
    : dims_(dims), values_(dims[0] * dims[1] * dims[2], fill) {
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) {
    throw ConfigError("tensor dimensions must be positive");
  }
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0) {
    throw ConfigError("tensor dimensions must be positive");
  }
  if (values_.size() != dims[0] * dims[1] * dims[2]) {
    throw ConfigError("tensor value count does not match dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ConfigError("tensor entries must be finite");
  }
}

std::size_t Tensor3::dim(int mode) const {
  check_mode(mode);
  return dims_[static_cast<std::size_t>(mode - 1)];
}

void Tensor3::mark_probability() {
  for (std::size_t i = 0; i < dims_[0]; ++i)
    for (std::size_t j = 0; j < dims_[1]; ++j)
      for (std::size_t l = 0; l < dims_[2]; ++l) {
        const double v = (*this)(i, j, l);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ModelError("entry " + index_string(i, j, l) + " = " + std::to_string(v) +
                           " lies outside [0,1]");
        }
      }
  probability_ = true;
}

void Tensor3::mark_symmetric(double tol) {
  if (dims_[0] != dims_[1]) throw ConfigError("symmetric flag requires p1 == p2");
  for (std::size_t i = 0; i < dims_[0]; ++i)
    for (std::size_t j = i + 1; j < dims_[1]; ++j)
      for (std::size_t l = 0; l < dims_[2]; ++l) {
        if (std::abs((*this)(i, j, l) - (*this)(j, i, l)) > tol) {
          throw ConfigError("tensor is not symmetric at " + index_string(i, j, l));
        }
      }
  symmetric_ = true;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  check_same_dims(*this, other, "operator+=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  clear_flags();
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  check_same_dims(*this, other, "operator-=");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  clear_flags();
  return *this;
}

Tensor3& Tensor3::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  clear_flags();
  return *this;
}

Tensor3 operator-(Tensor3 a, const Tensor3& b) {
  a -= b;
  return a;
}

Matrix matricize(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [p1, p2, p3] = t.dims();
  Matrix m;
  switch (mode) {
    case 1:
      m.resize(static_cast<Eigen::Index>(p1), static_cast<Eigen::Index>(p2 * p3));
      for (std::size_t i = 0; i < p1; ++i)
        for (std::size_t j = 0; j < p2; ++j)
          for (std::size_t l = 0; l < p3; ++l) m(i, j * p3 + l) = t(i, j, l);
      break;
    case 2:
      m.resize(static_cast<Eigen::Index>(p2), static_cast<Eigen::Index>(p3 * p1));
      for (std::size_t i = 0; i < p1; ++i)
        for (std::size_t j = 0; j < p2; ++j)
          for (std::size_t l = 0; l < p3; ++l) m(j, l * p1 + i) = t(i, j, l);
      break;
    default:
      m.resize(static_cast<Eigen::Index>(p3), static_cast<Eigen::Index>(p1 * p2));
      for (std::size_t i = 0; i < p1; ++i)
        for (std::size_t j = 0; j < p2; ++j)
          for (std::size_t l = 0; l < p3; ++l) m(l, i * p2 + j) = t(i, j, l);
      break;
  }
  return m;
}

Tensor3 dematricize(const Matrix& m, int mode, const Dims3& dims) {
  check_mode(mode);
  const auto [p1, p2, p3] = dims;
  const std::size_t s = static_cast<std::size_t>(mode - 1);
  const std::size_t rows = dims[s];
  const std::size_t cols = dims[0] * dims[1] * dims[2] / std::max<std::size_t>(rows, 1);
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw ConfigError("dematricize: matrix shape does not match mode and dimensions");
  }
  Tensor3 t(dims);
  for (std::size_t i = 0; i < p1; ++i)
    for (std::size_t j = 0; j < p2; ++j)
      for (std::size_t l = 0; l < p3; ++l) {
        switch (mode) {
          case 1: t(i, j, l) = m(i, j * p3 + l); break;
          case 2: t(i, j, l) = m(j, l * p1 + i); break;
          default: t(i, j, l) = m(l, i * p2 + j); break;
        }
      }
  return t;
}

Tensor3 mode_multiply(const Tensor3& t, int mode, const Matrix& u) {
  check_mode(mode);
  const auto [p1, p2, p3] = t.dims();
  const auto q = static_cast<std::size_t>(u.rows());
  if (static_cast<std::size_t>(u.cols()) != t.dim(mode) || q == 0) {
    throw ConfigError("mode_multiply: matrix columns must equal the tensor extent along the mode");
  }
  const auto ei = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  switch (mode) {
    case 1: {
      Tensor3 out({q, p2, p3});
      ConstRowMap in(t.values().data(), ei(p1), ei(p2 * p3));
      RowMap(out.values().data(), ei(q), ei(p2 * p3)).noalias() = u * in;
      return out;
    }
    case 2: {
      Tensor3 out({p1, q, p3});
      for (std::size_t i = 0; i < p1; ++i) {
        ConstRowMap in(t.values().data() + i * p2 * p3, ei(p2), ei(p3));
        RowMap(out.values().data() + i * q * p3, ei(q), ei(p3)).noalias() = u * in;
      }
      return out;
    }
    default: {
      Tensor3 out({p1, p2, q});
      ConstRowMap in(t.values().data(), ei(p1 * p2), ei(p3));
      RowMap(out.values().data(), ei(p1 * p2), ei(q)).noalias() = in * u.transpose();
      return out;
    }
  }
}

Matrix mode_gram(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [p1, p2, p3] = t.dims();
  const auto ei = [](std::size_t v) { return static_cast<Eigen::Index>(v); };
  switch (mode) {
    case 1: {
      ConstRowMap in(t.values().data(), ei(p1), ei(p2 * p3));
      return in * in.transpose();
    }
    case 2: {
      Matrix g = Matrix::Zero(ei(p2), ei(p2));
      for (std::size_t i = 0; i < p1; ++i) {
        ConstRowMap in(t.values().data() + i * p2 * p3, ei(p2), ei(p3));
        g.noalias() += in * in.transpose();
      }
      return g;
    }
    default: {
      ConstRowMap in(t.values().data(), ei(p1 * p2), ei(p3));
      return in.transpose() * in;
    }
  }
}

double frobenius_norm(const Tensor3& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v * v;
  return std::sqrt(acc);
}

Tensor3 clamp_unit(Tensor3 t) {
  for (double& v : t.values()) v = std::min(std::max(v, 0.0), 1.0);
  t.mark_probability();
  return t;
}

PrefixSums::PrefixSums(Dims3 dims) : dims_(dims) { sums_.emplace_back(dims); }

void PrefixSums::push(const Tensor3& a) {
  if (a.dims() != dims_) throw ConfigError("PrefixSums::push: tensor dimensions differ from stream");
  Tensor3 next = sums_.back();
  next += a;
  sums_.push_back(std::move(next));
}

Tensor3 running_average(const PrefixSums& prefix, std::size_t s, std::size_t t) {
  if (s >= t) throw ConfigError("running_average: empty window");
  if (t > prefix.length()) throw ConfigError("running_average: window exceeds stream length");
  Tensor3 avg(prefix.dims());
  const auto hi = prefix.sum(t).values();
  const auto lo = prefix.sum(s).values();
  const double inv = 1.0 / static_cast<double>(t - s);
  auto out = avg.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (hi[k] - lo[k]) * inv;
  return avg;
}

}  // namespace mrdpg
