#include "mrdpg/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "mrdpg/error.hpp"

namespace mrdpg {

std::vector<std::size_t> DiagonalBands::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(bands.size());
  for (const auto& b : bands) out.push_back(b.size());
  return out;
}

std::size_t DiagonalBands::total() const {
  std::size_t acc = 0;
  for (const auto& b : bands) acc += b.size();
  return acc;
}

DiagonalBands build_bands_undirected(std::size_t n) {
  if (n < 2) throw ConfigError("undirected bands need n >= 2");
  DiagonalBands out{n, n, false, {}};
  out.bands.resize(2 * n - 1);
  std::vector<char> head(n), tail(n);
  for (std::size_t k = 1; k <= 2 * n - 1; ++k) {
    std::fill(head.begin(), head.end(), 0);
    std::fill(tail.begin(), tail.end(), 0);
    auto& band = out.bands[k - 1];
    const std::size_t len = k <= n ? n + 1 - k : 2 * n - k;
    for (std::size_t u = 0; u < len; ++u) {
      // 0-based versions of (u+1, u+k) and (u+1+k-n, u+1)
      const std::size_t i = k <= n ? u : u + k - n;
      const std::size_t j = k <= n ? u + k - 1 : u;
      if (i == j || tail[i] || head[j]) continue;
      head[i] = tail[j] = 1;
      band.emplace_back(i, j);
    }
  }
  return out;
}

DiagonalBands build_bands_directed(std::size_t n1, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw ConfigError("directed bands need n1, n2 >= 1");
  DiagonalBands out{n1, n2, true, {}};
  out.bands.resize(n1 + n2 - 1);
  for (std::size_t k = 1; k <= n1 + n2 - 1; ++k) {
    auto& band = out.bands[k - 1];
    if (k <= n2) {
      const std::size_t len = std::min(n2 + 1 - k, n1);
      for (std::size_t i = 0; i < len; ++i) band.emplace_back(i, i + k - 1);
    } else {
      const std::size_t len = std::min(n1 + n2 - k, n2);
      for (std::size_t i = 0; i < len; ++i) band.emplace_back(i + k - n2, i);
    }
  }
  return out;
}

std::size_t band_size_closed_form(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1 || k > 2 * n - 1) throw ConfigError("band index out of range");
  if (k > n) k = k - n + 1;
  if (k == 1) return 0;
  const std::size_t m = k - 1;
  const std::size_t q = (n - m) / (2 * m);
  return m * q + std::min(m, n - m - 2 * m * q);
}

void write_bands_csv(std::ostream& out, const DiagonalBands& bands) {
  out << "k,i,j\n";
  for (std::size_t k = 0; k < bands.bands.size(); ++k) {
    for (const auto& [i, j] : bands.bands[k]) out << k + 1 << ',' << i + 1 << ',' << j + 1 << '\n';
  }
}

void KernelSpec::validate() const {
  if (L < 1) throw ConfigError("kernel dimension must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("bandwidth must be positive and finite");
}

double kernel_eval(const KernelSpec& k, std::span<const double> x) {
  if (k.family == KernelFamily::Gaussian) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(x.size())) * std::exp(-0.5 * sq);
  }
  double prod = 1.0;
  for (double v : x) prod *= std::max(1.0 - std::abs(v), 0.0);
  return prod;
}

double default_bandwidth(std::size_t horizon, std::size_t n1, std::size_t n2, std::size_t L) {
  if (horizon == 0 || n1 == 0 || n2 == 0 || L == 0) throw ConfigError("bandwidth inputs must be positive");
  const double v = static_cast<double>(horizon) * static_cast<double>(n1) * static_cast<double>(n2);
  return std::pow(500.0 * std::log(v) / v, 1.0 / static_cast<double>(L));
}

std::vector<BandAverage> band_averages(const Tensor3& p, const DiagonalBands& bands) {
  if (p.dim(1) != bands.n1 || p.dim(2) != bands.n2) {
    throw ConfigError("band_averages: bands do not match tensor dimensions");
  }
  const std::size_t L = p.dim(3);
  std::vector<BandAverage> out;
  out.reserve(bands.bands.size());
  for (const auto& band : bands.bands) {
    if (band.empty()) continue;
    BandAverage avg{static_cast<double>(band.size()), Vector::Zero(static_cast<Eigen::Index>(L))};
    for (const auto& [i, j] : band)
      for (std::size_t l = 0; l < L; ++l) avg.mean(static_cast<Eigen::Index>(l)) += p(i, j, l);
    avg.mean /= avg.weight;
    out.push_back(std::move(avg));
  }
  return out;
}

double grid_size_formula(double alpha, std::size_t t, std::size_t n_eff, std::size_t L, double c_m,
                         std::size_t n_max) {
  if (!(alpha > 0.0) || t < 1 || n_eff < 1 || L < 1 || !(c_m > 0.0)) {
    throw ConfigError("grid size: inputs must be positive");
  }
  if (n_max == 0) n_max = n_eff;
  const double dl = static_cast<double>(L);
  const double log_term =
      std::log(static_cast<double>(std::max(n_max, t)) / alpha);
  if (!(log_term > 0.0)) throw ConfigError("grid size: log((n v t) / alpha) must be positive");
  return c_m * std::pow(dl, -dl) *
         std::pow(static_cast<double>(t) * static_cast<double>(n_eff), dl / 2.0) *
         std::pow(log_term, -dl / 2.0 + 1.0);
}

std::size_t grid_size(double alpha, std::size_t t, std::size_t n_eff, std::size_t L, double c_m,
                      std::size_t n_max, GridLimits limits) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (limits.m_min < 1 || limits.m_min > limits.m_max) throw ConfigError("invalid grid limits");
  const double raw = std::ceil(grid_size_formula(alpha, t, n_eff, L, c_m, n_max));
  if (!(raw < static_cast<double>(limits.m_max))) return limits.m_max;
  return std::max(limits.m_min, static_cast<std::size_t>(raw));
}

EvalGrid sample_grid(std::size_t L, std::size_t m, Rng& rng) {
  if (L < 1 || m < 1) throw ConfigError("grid needs L >= 1 and M >= 1");
  EvalGrid g{Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(L))};
  for (Eigen::Index v = 0; v < g.points.rows(); ++v)
    for (Eigen::Index l = 0; l < g.points.cols(); ++l) g.points(v, l) = uniform01(rng);
  return g;
}

double frob_scan(const Tensor3& p_left, const Tensor3& p_right) {
  if (p_left.dims() != p_right.dims()) throw ConfigError("frob_scan: tensor dimensions differ");
  const auto a = p_left.values();
  const auto b = p_right.values();
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

Vector kernel_profile(const std::vector<BandAverage>& averages, const KernelSpec& kernel,
                      const EvalGrid& grid) {
  kernel.validate();
  if (grid.size() == 0) throw ConfigError("kernel scan: empty grid");
  if (grid.dim() != kernel.L) throw ConfigError("kernel scan: grid dimension differs from L");
  const auto L = static_cast<Eigen::Index>(kernel.L);
  for (const auto& a : averages) {
    if (a.mean.size() != L) throw ConfigError("kernel scan: band averages do not have length L");
  }
  const double inv_h = 1.0 / kernel.h;
  Vector f = Vector::Zero(grid.points.rows());
  std::vector<double> x(kernel.L);
  if (kernel.family == KernelFamily::Gaussian) {
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(L));
    for (Eigen::Index v = 0; v < grid.points.rows(); ++v) {
      double acc = 0.0;
      for (const auto& a : averages) {
        double sq = 0.0;
        for (Eigen::Index l = 0; l < L; ++l) {
          const double u = (grid.points(v, l) - a.mean(l)) * inv_h;
          sq += u * u;
        }
        acc += a.weight * std::exp(-0.5 * sq);
      }
      f(v) = norm * acc;
    }
    return f;
  }
  for (Eigen::Index v = 0; v < grid.points.rows(); ++v) {
    double acc = 0.0;
    for (const auto& a : averages) {
      for (Eigen::Index l = 0; l < L; ++l) x[static_cast<std::size_t>(l)] = (grid.points(v, l) - a.mean(l)) * inv_h;
      acc += a.weight * kernel_eval(kernel, x);
    }
    f(v) = acc;
  }
  return f;
}

double kernel_scan_profiles(const Vector& left, const Vector& right, double total_weight,
                            const KernelSpec& kernel) {
  if (left.size() != right.size() || left.size() == 0) throw ConfigError("kernel scan: profile sizes differ");
  if (!(total_weight > 0.0)) throw ConfigError("kernel scan: zero total band weight");
  const double scale = 1.0 / (total_weight * std::pow(kernel.h, static_cast<double>(kernel.L)));
  return (left - right).cwiseAbs().maxCoeff() * scale;
}

double kernel_scan(const Tensor3& p_left, const Tensor3& p_right, const DiagonalBands& bands,
                   const KernelSpec& kernel, const EvalGrid& grid) {
  if (p_left.dims() != p_right.dims()) throw ConfigError("kernel_scan: tensor dimensions differ");
  if (p_left.dim(3) != kernel.L) throw ConfigError("kernel_scan: kernel dimension differs from L");
  const auto left = band_averages(p_left, bands);
  const auto right = band_averages(p_right, bands);
  double total = 0.0;
  for (const auto& a : left) total += a.weight;
  return kernel_scan_profiles(kernel_profile(left, kernel, grid), kernel_profile(right, kernel, grid),
                              total, kernel);
}

}  // namespace mrdpg
