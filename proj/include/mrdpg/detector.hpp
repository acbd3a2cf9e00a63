#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mrdpg/scan.hpp"
#include "mrdpg/spectral.hpp"
#include "mrdpg/tensor.hpp"

namespace mrdpg {

// C sqrt((d^2 m + n d + L m) log(t / alpha)) (1/sqrt(s) + 1/sqrt(t - s)).
double fixed_latent_threshold(double c_tau, double d, double m, double n, double L, double alpha,
                              std::size_t s, std::size_t t);
// C h^{-L-1} sqrt((L^2 v d) log((n_max v t) / alpha) / n_eff) (1/sqrt(s) + 1/sqrt(t - s)).
double kernel_threshold(double c_tau, double h, double L, double d, double n_eff, double n_max,
                        double alpha, std::size_t s, std::size_t t);

enum class ScheduleKind { FixedLatent, Kernel };

struct ThresholdSchedule {
  ScheduleKind kind = ScheduleKind::FixedLatent;
  double c_tau = 1.0;
  double alpha = 0.05;
  double d = 1.0;
  double m = 1.0;  // FixedLatent only
  double n = 1.0;  // FixedLatent only
  double L = 1.0;
  double h = 1.0;      // Kernel only
  double n_eff = 1.0;  // Kernel: n1 ^ n2
  double n_max = 1.0;  // Kernel: n1 v n2

  void validate() const;
};

double threshold(const ThresholdSchedule& sched, std::size_t s, std::size_t t);

enum class EstimatorKind { THPCA, HOSVD1 };
enum class StatisticKind { Frobenius, Kernel };

std::string to_string(EstimatorKind e);
std::string to_string(StatisticKind s);

struct DetectorConfig {
  EstimatorKind estimator = EstimatorKind::THPCA;
  std::optional<TuckerRanks> ranks;  // default_ranks(dims) when empty
  StatisticKind statistic = StatisticKind::Frobenius;
  KernelSpec kernel;
  bool directed = false;  // kernel bands; forced when n1 != n2
  // Kernel statistic with the configured estimator instead of HOSVD1.
  bool kernel_uses_estimator = false;
  ThresholdSchedule schedule;
  std::size_t s_stride = 1;
  std::size_t min_segment = 2;

  // Kernel grid: drawn once per run with M = grid_size(alpha, grid_t, ...),
  // or redrawn at every t with M_{alpha,t} when regrow_grid is set.
  double c_m = 1.0;
  GridLimits grid_limits;
  std::size_t grid_t = 100;
  bool regrow_grid = false;
  std::uint64_t grid_seed = 0;

  void validate(const Dims3& dims) const;
};

// What the Frobenius and kernel statistics compare: estimator output on a window average.
Tensor3 estimate(const Tensor3& average, EstimatorKind kind, const TuckerRanks& ranks);

struct StepRecord {
  std::size_t t = 0;
  double max_statistic = 0.0;   // max over scanned s of D_{s,t}; 0 when nothing was scanned
  std::size_t argmax_s = 0;
  double threshold_at_argmax = 0.0;
  double max_ratio = 0.0;       // max over s of D_{s,t} / tau_{s,t}(C_tau = 1)
};

/// Online detector: prefix sums, cached P^{0,s} estimates and the kernel grid.
///
/// The alarm rule is D_{s,t} > tau_{s,t} for some scanned s, evaluated as
/// D_{s,t} / tau_{s,t}(C_tau = 1) > C_tau.
class Detector {
 public:
  Detector(DetectorConfig cfg, Dims3 dims);

  // Ingests A(t) and returns t when it raises the alarm.
  std::optional<std::size_t> step(const Tensor3& a);
  // Ingests A(t) without an alarm decision; returns the step record.
  const StepRecord& observe(const Tensor3& a);

  std::size_t time() const { return prefix_.length(); }
  std::optional<std::size_t> alarm() const { return alarm_; }
  const std::vector<StepRecord>& history() const { return history_; }
  // Largest D / tau(C_tau = 1) seen so far.
  double max_ratio() const { return max_ratio_; }
  const DetectorConfig& config() const { return cfg_; }
  const TuckerRanks& ranks() const { return ranks_; }

 private:
  struct Cached {
    Tensor3 estimate;
    Vector profile;            // kernel statistic only
    std::size_t profile_t = 0; // grid generation the profile belongs to
  };
  bool scanned(std::size_t s, std::size_t t) const;
  Tensor3 window_estimate(std::size_t s, std::size_t t) const;
  const Cached& left(std::size_t s);
  double unit_threshold(std::size_t s, std::size_t t) const;
  void refresh_grid(std::size_t t);

  DetectorConfig cfg_;
  TuckerRanks ranks_;
  PrefixSums prefix_;
  std::vector<std::optional<Cached>> cache_;  // indexed by s
  std::optional<DiagonalBands> bands_;
  EvalGrid grid_;
  std::size_t grid_t_ = 0;
  double band_weight_ = 0.0;
  std::optional<std::size_t> alarm_;
  std::vector<StepRecord> history_;
  double max_ratio_ = 0.0;
};

struct DetectionResult {
  std::optional<std::size_t> alarm;
  std::vector<StepRecord> steps;
};

DetectionResult run_detection(const std::vector<Tensor3>& stream, const DetectorConfig& cfg);

// Max over the whole stream of D / tau(C_tau = 1). A detector with constant
// C alarms on this stream exactly when the value exceeds C.
double max_ratio_run(const std::vector<Tensor3>& stream, const DetectorConfig& cfg);

// count points spaced evenly in log between lo and hi (inclusive).
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct CalibrationResult {
  double c_tau = 0.0;
  bool saturated = false;              // no grid value met the target; c_tau is the grid maximum
  std::vector<double> ratios;          // per permutation
  std::vector<double> grid;
  std::vector<double> alarm_fraction;  // per grid value
};

// Replays the detector on `permutations` random time orders of the training
// tensors and returns the smallest grid value whose alarm fraction is <= alpha.
CalibrationResult calibrate(const std::vector<Tensor3>& training, std::size_t permutations,
                            double alpha, const std::vector<double>& c_grid,
                            const DetectorConfig& cfg, std::uint64_t seed);

struct Metrics {
  double delay = std::numeric_limits<double>::quiet_NaN();  // NaN when no trial has t >= delta
  double pfa = 0.0;
  double pfn = 0.0;
  std::size_t trials = 0;
};

// Missing alarms count as t = T.
Metrics evaluate(const std::vector<std::optional<std::size_t>>& estimates, std::size_t delta,
                 std::size_t horizon);

}  // namespace mrdpg
