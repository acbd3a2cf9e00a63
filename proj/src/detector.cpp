#include "mrdpg/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrdpg/error.hpp"
#include "mrdpg/models.hpp"

namespace mrdpg {

namespace {

double bracket(std::size_t s, std::size_t t) {
  if (s < 1 || s >= t) {
    throw ConfigError("threshold needs 1 <= s < t (got s=" + std::to_string(s) +
                      ", t=" + std::to_string(t) + ")");
  }
  return 1.0 / std::sqrt(static_cast<double>(s)) + 1.0 / std::sqrt(static_cast<double>(t - s));
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

double fixed_latent_threshold(double c_tau, double d, double m, double n, double L, double alpha,
                              std::size_t s, std::size_t t) {
  const double br = bracket(s, t);
  const double size = d * d * m + n * d + L * m;
  return c_tau * std::sqrt(size * std::log(static_cast<double>(t) / alpha)) * br;
}

double kernel_threshold(double c_tau, double h, double L, double d, double n_eff, double n_max,
                        double alpha, std::size_t s, std::size_t t) {
  const double br = bracket(s, t);
  const double lead = std::max(L * L, d);
  const double log_term = std::log(std::max(n_max, static_cast<double>(t)) / alpha);
  return c_tau * std::pow(h, -L - 1.0) * std::sqrt(lead * log_term / n_eff) * br;
}

void ThresholdSchedule::validate() const {
  require_positive(c_tau, "c_tau");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  require_positive(d, "d");
  require_positive(L, "L");
  if (kind == ScheduleKind::FixedLatent) {
    require_positive(m, "m");
    require_positive(n, "n");
  } else {
    require_positive(h, "h");
    require_positive(n_eff, "n_eff");
    require_positive(n_max, "n_max");
  }
}

double threshold(const ThresholdSchedule& sched, std::size_t s, std::size_t t) {
  sched.validate();
  if (sched.kind == ScheduleKind::FixedLatent) {
    return fixed_latent_threshold(sched.c_tau, sched.d, sched.m, sched.n, sched.L, sched.alpha, s, t);
  }
  return kernel_threshold(sched.c_tau, sched.h, sched.L, sched.d, sched.n_eff, sched.n_max,
                          sched.alpha, s, t);
}

std::string to_string(EstimatorKind e) { return e == EstimatorKind::THPCA ? "thpca" : "hosvd1"; }
std::string to_string(StatisticKind s) { return s == StatisticKind::Frobenius ? "frob" : "kernel"; }

void DetectorConfig::validate(const Dims3& dims) const {
  schedule.validate();
  if (s_stride < 1) throw ConfigError("s_stride must be at least 1");
  if (min_segment < 1) throw ConfigError("min_segment must be at least 1");
  if (ranks) validate_ranks(*ranks, dims);
  const bool kernel_stat = statistic == StatisticKind::Kernel;
  if (kernel_stat != (schedule.kind == ScheduleKind::Kernel)) {
    throw ConfigError("statistic and threshold schedule kinds do not match");
  }
  if (kernel_stat) {
    kernel.validate();
    if (kernel.L != dims[2]) throw ConfigError("kernel dimension must equal the number of layers");
    if (!(c_m > 0.0)) throw ConfigError("c_m must be positive");
    if (grid_t < 1) throw ConfigError("grid_t must be at least 1");
    if (grid_limits.m_min < 1 || grid_limits.m_min > grid_limits.m_max) {
      throw ConfigError("invalid grid limits");
    }
    if (!directed && dims[0] != dims[1]) throw ConfigError("undirected bands need n1 == n2");
  }
}

Tensor3 estimate(const Tensor3& average, EstimatorKind kind, const TuckerRanks& ranks) {
  return kind == EstimatorKind::THPCA ? thpca(average, ranks) : hosvd_rank1(average);
}

Detector::Detector(DetectorConfig cfg, Dims3 dims)
    : cfg_(std::move(cfg)), ranks_(cfg_.ranks.value_or(default_ranks(dims))), prefix_(dims) {
  cfg_.validate(dims);
  if (cfg_.statistic == StatisticKind::Kernel) {
    bands_ = cfg_.directed ? build_bands_directed(dims[0], dims[1]) : build_bands_undirected(dims[0]);
    band_weight_ = static_cast<double>(bands_->total());
    if (!(band_weight_ > 0.0)) throw ConfigError("kernel scan: zero total band weight");
  }
  cache_.emplace_back();  // s = 0 is never scanned
}

bool Detector::scanned(std::size_t s, std::size_t t) const {
  const std::size_t m = cfg_.min_segment;
  return s >= m && s < t && t - s >= m && (s - m) % cfg_.s_stride == 0;
}

Tensor3 Detector::window_estimate(std::size_t s, std::size_t t) const {
  const EstimatorKind kind = cfg_.statistic == StatisticKind::Kernel && !cfg_.kernel_uses_estimator
                                 ? EstimatorKind::HOSVD1
                                 : cfg_.estimator;
  return estimate(running_average(prefix_, s, t), kind, ranks_);
}

void Detector::refresh_grid(std::size_t t) {
  const std::size_t grid_t = cfg_.regrow_grid ? t : cfg_.grid_t;
  if (grid_.size() > 0 && grid_t == grid_t_) return;
  const auto& d = prefix_.dims();
  const std::size_t m = grid_size(cfg_.schedule.alpha, grid_t, std::min(d[0], d[1]), d[2], cfg_.c_m,
                                  std::max(d[0], d[1]), cfg_.grid_limits);
  Rng rng = make_rng(cfg_.regrow_grid ? trial_seed(cfg_.grid_seed, t) : cfg_.grid_seed);
  grid_ = sample_grid(d[2], m, rng);
  grid_t_ = grid_t;
}

const Detector::Cached& Detector::left(std::size_t s) {
  if (cache_.size() <= s) cache_.resize(s + 1);
  auto& slot = cache_[s];
  if (!slot) slot = Cached{window_estimate(0, s), Vector(), 0};
  if (bands_ && slot->profile_t != grid_t_) {
    slot->profile = kernel_profile(band_averages(slot->estimate, *bands_), cfg_.kernel, grid_);
    slot->profile_t = grid_t_;
  }
  return *slot;
}

double Detector::unit_threshold(std::size_t s, std::size_t t) const {
  ThresholdSchedule unit = cfg_.schedule;
  unit.c_tau = 1.0;
  return threshold(unit, s, t);
}

const StepRecord& Detector::observe(const Tensor3& a) {
  if (a.dims() != prefix_.dims()) throw ConfigError("step: tensor dimensions differ from the stream");
  prefix_.push(a);
  const std::size_t t = prefix_.length();
  if (bands_) refresh_grid(t);
  StepRecord rec;
  rec.t = t;
  bool first = true;
  for (std::size_t s = cfg_.min_segment; s < t; s += cfg_.s_stride) {
    if (!scanned(s, t)) continue;
    const Cached& l = left(s);
    const Tensor3 right = window_estimate(s, t);
    double stat = 0.0;
    if (bands_) {
      const Vector rp = kernel_profile(band_averages(right, *bands_), cfg_.kernel, grid_);
      stat = kernel_scan_profiles(l.profile, rp, band_weight_, cfg_.kernel);
    } else {
      stat = frob_scan(l.estimate, right);
    }
    const double unit = unit_threshold(s, t);
    const double ratio = stat / unit;
    if (first || stat > rec.max_statistic) {
      rec.max_statistic = stat;
      rec.argmax_s = s;
      rec.threshold_at_argmax = unit * cfg_.schedule.c_tau;
    }
    rec.max_ratio = first ? ratio : std::max(rec.max_ratio, ratio);
    first = false;
  }
  max_ratio_ = std::max(max_ratio_, rec.max_ratio);
  history_.push_back(rec);
  return history_.back();
}

std::optional<std::size_t> Detector::step(const Tensor3& a) {
  if (alarm_) throw ConfigError("step: alarm already raised at t=" + std::to_string(*alarm_));
  const StepRecord& rec = observe(a);
  if (rec.max_ratio > cfg_.schedule.c_tau) alarm_ = rec.t;
  return alarm_;
}

DetectionResult run_detection(const std::vector<Tensor3>& stream, const DetectorConfig& cfg) {
  DetectionResult out;
  if (stream.empty()) return out;
  Detector det(cfg, stream.front().dims());
  for (const auto& a : stream) {
    if (det.step(a)) break;
  }
  out.alarm = det.alarm();
  out.steps = det.history();
  return out;
}

double max_ratio_run(const std::vector<Tensor3>& stream, const DetectorConfig& cfg) {
  if (stream.empty()) throw ConfigError("max_ratio_run: empty stream");
  Detector det(cfg, stream.front().dims());
  for (const auto& a : stream) det.observe(a);
  return det.max_ratio();
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError("log grid needs 0 < lo <= hi, count >= 1");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

CalibrationResult calibrate(const std::vector<Tensor3>& training, std::size_t permutations,
                            double alpha, const std::vector<double>& c_grid,
                            const DetectorConfig& cfg, std::uint64_t seed) {
  if (training.empty()) throw ConfigError("calibrate: empty training set");
  if (training.size() < 2 * cfg.min_segment) {
    throw ConfigError("calibrate: training set shorter than 2 * min_segment");
  }
  if (permutations < 1) throw ConfigError("calibrate: need at least one permutation");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (c_grid.empty()) throw ConfigError("calibrate: empty c_tau grid");
  for (std::size_t k = 0; k < c_grid.size(); ++k) {
    if (!(c_grid[k] > 0.0) || (k > 0 && !(c_grid[k] > c_grid[k - 1]))) {
      throw ConfigError("calibrate: c_tau grid must be positive and strictly ascending");
    }
  }
  CalibrationResult out;
  out.grid = c_grid;
  Rng rng = make_rng(seed);
  std::vector<Tensor3> permuted(training.size());
  for (std::size_t b = 0; b < permutations; ++b) {
    const auto perm = random_permutation(training.size(), rng);
    for (std::size_t u = 0; u < perm.size(); ++u) permuted[u] = training[perm[u]];
    out.ratios.push_back(max_ratio_run(permuted, cfg));
  }
  const double denom = static_cast<double>(permutations);
  std::optional<double> pick;
  for (double c : c_grid) {
    const auto alarms = std::count_if(out.ratios.begin(), out.ratios.end(), [&](double r) { return r > c; });
    const double frac = static_cast<double>(alarms) / denom;
    out.alarm_fraction.push_back(frac);
    if (!pick && frac <= alpha) pick = c;
  }
  out.saturated = !pick.has_value();
  out.c_tau = pick.value_or(c_grid.back());
  return out;
}

Metrics evaluate(const std::vector<std::optional<std::size_t>>& estimates, std::size_t delta,
                 std::size_t horizon) {
  Metrics m;
  m.trials = estimates.size();
  if (estimates.empty()) return m;
  double delay_sum = 0.0;
  std::size_t late = 0, early = 0, missed = 0;
  for (const auto& e : estimates) {
    const std::size_t t = e.value_or(horizon);
    if (t >= delta) {
      delay_sum += static_cast<double>(t - delta);
      ++late;
    } else {
      ++early;
    }
    if (t == horizon) ++missed;
  }
  const double n = static_cast<double>(estimates.size());
  m.pfa = static_cast<double>(early) / n;
  m.pfn = static_cast<double>(missed) / n;
  if (late > 0) m.delay = delay_sum / static_cast<double>(late);
  return m;
}

}  // namespace mrdpg
