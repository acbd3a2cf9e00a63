#pragma once

// Slow reference implementations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mrdpg/scan.hpp"
#include "mrdpg/tensor.hpp"

namespace oracle {

// Largest subset of diagonal k (1-based) of an n x n layer whose pairs use
// pairwise distinct nodes, by trying every subset.
inline std::size_t exhaustive_band_max(std::size_t n, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> diag;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      const bool on = k <= n ? j == i + k - 1 : i == j + k - n;
      if (on && i != j) diag.emplace_back(i, j);
    }
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << diag.size()); ++mask) {
    std::vector<int> used(n + 1, 0);
    bool ok = true;
    std::size_t count = 0;
    for (std::size_t b = 0; b < diag.size() && ok; ++b) {
      if (!(mask >> b & 1)) continue;
      auto [i, j] = diag[b];
      if (used[i] || used[j]) ok = false;
      used[i] = used[j] = 1;
      ++count;
    }
    if (ok) best = std::max(best, count);
  }
  return best;
}

inline double gaussian(const std::vector<double>& x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::exp(-0.5 * sq) / std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(x.size()));
}

inline double triangular(const std::vector<double>& x) {
  double p = 1.0;
  for (double v : x) p *= std::abs(v) < 1.0 ? 1.0 - std::abs(v) : 0.0;
  return p;
}

// Band means recomputed pair by pair; empty bands give an empty vector.
inline std::vector<std::vector<double>> band_means(const mrdpg::Tensor3& p, const mrdpg::DiagonalBands& bands) {
  std::vector<std::vector<double>> out;
  for (const auto& band : bands.bands) {
    if (band.empty()) continue;
    std::vector<double> mean(p.dim(3), 0.0);
    for (std::size_t l = 0; l < p.dim(3); ++l) {
      for (const auto& [i, j] : band) mean[l] += p(i, j, l);
      mean[l] /= static_cast<double>(band.size());
    }
    out.push_back(mean);
  }
  return out;
}

inline double kernel_scan(const mrdpg::Tensor3& a, const mrdpg::Tensor3& b, const mrdpg::DiagonalBands& bands,
                          const mrdpg::KernelSpec& k, const mrdpg::EvalGrid& grid) {
  const auto ma = band_means(a, bands);
  const auto mb = band_means(b, bands);
  std::vector<double> w;
  double total = 0.0;
  for (const auto& band : bands.bands)
    if (!band.empty()) {
      w.push_back(static_cast<double>(band.size()));
      total += w.back();
    }
  double best = 0.0;
  for (Eigen::Index v = 0; v < grid.points.rows(); ++v) {
    double fa = 0.0, fb = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) {
      std::vector<double> xa(k.L), xb(k.L);
      for (std::size_t l = 0; l < k.L; ++l) {
        xa[l] = (grid.points(v, static_cast<Eigen::Index>(l)) - ma[q][l]) / k.h;
        xb[l] = (grid.points(v, static_cast<Eigen::Index>(l)) - mb[q][l]) / k.h;
      }
      const bool g = k.family == mrdpg::KernelFamily::Gaussian;
      fa += w[q] * (g ? gaussian(xa) : triangular(xa));
      fb += w[q] * (g ? gaussian(xb) : triangular(xb));
    }
    best = std::max(best, std::abs(fa - fb));
  }
  return best / (total * std::pow(k.h, static_cast<double>(k.L)));
}

}  // namespace oracle
