#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "mrdpg/models.hpp"
#include "mrdpg/tensor.hpp"

namespace mrdpg {

using IndexPair = std::pair<std::size_t, std::size_t>;  // 0-based (head, tail)

/// Node-pair families S_1, ..., S_{n1+n2-1} taken along the diagonals of an
/// n1 x n2 layer. Bands are stored 0-based in both k and the pair indices.
struct DiagonalBands {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool directed = false;
  std::vector<std::vector<IndexPair>> bands;

  std::vector<std::size_t> sizes() const;
  std::size_t total() const;
};

// Greedy maximal subset of each diagonal: walk i upwards and keep (i, j) when
// i != j, i is not a tail and j is not a head of a pair already kept.
DiagonalBands build_bands_undirected(std::size_t n);
DiagonalBands build_bands_directed(std::size_t n1, std::size_t n2);

// Closed-form |S_k| for the undirected bands, k = 1..2n-1 (1-based).
std::size_t band_size_closed_form(std::size_t n, std::size_t k);

// CSV rows "k,i,j", all 1-based.
void write_bands_csv(std::ostream& out, const DiagonalBands& bands);

enum class KernelFamily { Gaussian, Triangular };

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  std::size_t L = 1;
  double h = 1.0;

  void validate() const;
};

// Gaussian: (2 pi)^{-L/2} exp(-|x|^2 / 2). Triangular: prod max(1 - |x_l|, 0).
double kernel_eval(const KernelSpec& k, std::span<const double> x);

// h = (500 log(T n1 n2) / (T n1 n2))^{1/L}.
double default_bandwidth(std::size_t horizon, std::size_t n1, std::size_t n2, std::size_t L);

struct BandAverage {
  double weight = 0.0;  // |S_k|
  Vector mean;          // length L
};

// Mean fibre P(i, j, :) over each nonempty band.
std::vector<BandAverage> band_averages(const Tensor3& p, const DiagonalBands& bands);

// C_M L^{-L} (t n_eff)^{L/2} [log((n_max v t) / alpha)]^{-L/2+1}; n_max = 0 means n_eff.
double grid_size_formula(double alpha, std::size_t t, std::size_t n_eff, std::size_t L, double c_m,
                         std::size_t n_max = 0);

struct GridLimits {
  std::size_t m_min = 64;
  std::size_t m_max = 20000;
};

// ceil(grid_size_formula) clamped to [m_min, m_max]; alpha must lie in (0,1).
std::size_t grid_size(double alpha, std::size_t t, std::size_t n_eff, std::size_t L, double c_m,
                      std::size_t n_max = 0, GridLimits limits = {});

struct EvalGrid {
  Matrix points;  // M x L, each row in [0,1]^L

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

EvalGrid sample_grid(std::size_t L, std::size_t m, Rng& rng);

double frob_scan(const Tensor3& p_left, const Tensor3& p_right);

// F(z_v) = sum_k |S_k| K((z_v - mean_k) / h) for every grid point.
Vector kernel_profile(const std::vector<BandAverage>& averages, const KernelSpec& kernel,
                      const EvalGrid& grid);

// max_v |F_left(v) - F_right(v)| / (sum_k |S_k| * h^L).
double kernel_scan_profiles(const Vector& left, const Vector& right, double total_weight,
                            const KernelSpec& kernel);

double kernel_scan(const Tensor3& p_left, const Tensor3& p_right, const DiagonalBands& bands,
                   const KernelSpec& kernel, const EvalGrid& grid);

}  // namespace mrdpg
