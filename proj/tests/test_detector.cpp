#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "mrdpg/detector.hpp"
#include "mrdpg/error.hpp"
#include "oracles.hpp"

using namespace mrdpg;

namespace {

DetectorConfig frob_config(std::size_t n, std::size_t L, int d, TuckerRanks ranks) {
  DetectorConfig c;
  c.estimator = EstimatorKind::THPCA;
  c.ranks = ranks;
  c.schedule = {ScheduleKind::FixedLatent, 1.0, 0.05, static_cast<double>(d), static_cast<double>(L),
                static_cast<double>(n), static_cast<double>(L)};
  return c;
}

DetectorConfig kernel_config(std::size_t n, std::size_t L, int d, double h) {
  DetectorConfig c;
  c.statistic = StatisticKind::Kernel;
  c.kernel = {KernelFamily::Gaussian, L, h};
  c.directed = true;
  c.schedule.kind = ScheduleKind::Kernel;
  c.schedule.d = d;
  c.schedule.L = static_cast<double>(L);
  c.schedule.h = h;
  c.schedule.n_eff = c.schedule.n_max = static_cast<double>(n);
  c.grid_limits = {16, 16};
  c.grid_seed = 99;
  return c;
}

// Two-community SBM probability tensor and its layer flip.
std::pair<Tensor3, Tensor3> planted_pair(std::size_t n, std::size_t L, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Tensor3 p = gen_sbm_prob(n, L, 2, rng);
  return {p, flip_layers(p)};
}

std::vector<Tensor3> random_stream(std::size_t n, std::size_t L, std::size_t T, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Tensor3 p = gen_sbm_prob(n, L, 2, rng);
  std::vector<Tensor3> out;
  for (std::size_t t = 0; t < T; ++t) out.push_back(sample_adjacency(p, true, rng));
  return out;
}

}  // namespace

TEST_CASE("threshold formulas") {
  CHECK(fixed_latent_threshold(1, 1, 1, 1, 1, 2.0 / std::numbers::e, 1, 2) ==
        doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(kernel_threshold(1, 1, 1, 1, 4, 4, 4.0 / std::numbers::e, 1, 2) == doctest::Approx(1.0).epsilon(1e-12));
  ThresholdSchedule s{ScheduleKind::FixedLatent, 2.5, 0.05, 3, 4, 20, 4};
  CHECK(threshold(s, 3, 10) == doctest::Approx(fixed_latent_threshold(2.5, 3, 4, 20, 4, 0.05, 3, 10)));
  CHECK_THROWS_AS(threshold(s, 0, 3), ConfigError);
  CHECK_THROWS_AS(threshold(s, 3, 3), ConfigError);
  s.alpha = 1.2;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("thresholds are linear in c_tau") {
  ThresholdSchedule s{ScheduleKind::Kernel, 1.0, 0.01, 4, 1, 1, 3, 0.3, 50, 50};
  const double base = threshold(s, 4, 11);
  for (double c : {0.1, 0.7, 3.0}) {
    s.c_tau = c;
    CHECK(threshold(s, 4, 11) == doctest::Approx(c * base).epsilon(1e-14));
  }
}

TEST_CASE("detector steps agree with a direct scan") {
  const auto stream = random_stream(8, 2, 9, 61);
  for (auto [seg, stride] : {std::pair{1u, 1u}, std::pair{2u, 1u}, std::pair{2u, 3u}}) {
    DetectorConfig cfg = frob_config(8, 2, 2, {2, 2, 2});
    cfg.min_segment = seg;
    cfg.s_stride = stride;
    Detector det(cfg, stream[0].dims());
    PrefixSums ps(stream[0].dims());
    for (std::size_t t = 1; t <= stream.size(); ++t) {
      const StepRecord rec = det.observe(stream[t - 1]);
      ps.push(stream[t - 1]);
      double best = 0.0;
      std::size_t count = 0;
      for (std::size_t s = 1; s < t; ++s) {
        if (s < seg || t - s < seg || (s - seg) % stride != 0) continue;
        const double d = frob_scan(thpca(running_average(ps, 0, s), {2, 2, 2}),
                                   thpca(running_average(ps, s, t), {2, 2, 2}));
        best = std::max(best, d / threshold(cfg.schedule, s, t));
        ++count;
      }
      if (seg == 1 && stride == 1) CHECK(count == t - 1);
      CHECK(rec.max_ratio == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("kernel detector agrees with a direct scan") {
  Rng rng = make_rng(62);
  const DirichletDraw draw = gen_dirichlet_prob(6, 5, 3, 2, Vector::Ones(3), Vector::Ones(3), rng);
  const auto stream = gen_dynamic_stream({ChangeKind::None, 0, 7}, draw.model, 5);
  DetectorConfig cfg = kernel_config(5, 2, 3, 0.4);
  cfg.schedule.n_max = 6;
  Rng grng = make_rng(cfg.grid_seed);
  const EvalGrid grid = sample_grid(2, 16, grng);
  const DiagonalBands bands = build_bands_directed(6, 5);
  Detector det(cfg, stream[0].dims());
  PrefixSums ps(stream[0].dims());
  for (std::size_t t = 1; t <= stream.size(); ++t) {
    const StepRecord rec = det.observe(stream[t - 1]);
    ps.push(stream[t - 1]);
    double best = 0.0;
    for (std::size_t s = 2; s + 2 <= t; ++s) {
      const double d = oracle::kernel_scan(hosvd_rank1(running_average(ps, 0, s)),
                                           hosvd_rank1(running_average(ps, s, t)), bands, cfg.kernel, grid);
      best = std::max(best, d / threshold(cfg.schedule, s, t));
    }
    CHECK(rec.max_ratio == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("noiseless planted change") {
  const auto [pre, post] = planted_pair(10, 3, 63);
  std::vector<Tensor3> stream;
  for (int t = 1; t <= 12; ++t) stream.push_back(t <= 5 ? pre : post);
  DetectorConfig cfg = frob_config(10, 3, 2, {2, 2, 2});
  cfg.schedule.c_tau = 0.01;

  SUBCASE("statistic vanishes before the change") {
    Detector det(cfg, pre.dims());
    for (int t = 0; t < 5; ++t) CHECK(det.observe(stream[static_cast<std::size_t>(t)]).max_statistic < 1e-6);
  }
  SUBCASE("alarm lands right after the change") {
    // at t = 6 the window (4, 6] already straddles the change
    CHECK(run_detection(stream, cfg).alarm == std::optional<std::size_t>(6));
    cfg.min_segment = 1;
    CHECK(run_detection(stream, cfg).alarm == std::optional<std::size_t>(6));
  }
  SUBCASE("huge constant never alarms") {
    cfg.schedule.c_tau = 1e9;
    const DetectionResult r = run_detection(stream, cfg);
    CHECK_FALSE(r.alarm);
    CHECK(r.steps.size() == stream.size());
  }
}

TEST_CASE("tiny constant alarms at the first scanned time") {
  const auto stream = random_stream(8, 2, 10, 64);
  DetectorConfig cfg = frob_config(8, 2, 2, {2, 2, 2});
  cfg.schedule.c_tau = 1e-12;
  CHECK(run_detection(stream, cfg).alarm == std::optional<std::size_t>(4));
}

TEST_CASE("detector rejects steps after an alarm") {
  const auto stream = random_stream(6, 2, 5, 65);
  DetectorConfig cfg = frob_config(6, 2, 2, {2, 2, 2});
  cfg.schedule.c_tau = 1e-12;
  Detector det(cfg, stream[0].dims());
  for (std::size_t t = 0; t < 4; ++t) det.step(stream[t]);
  REQUIRE(det.alarm());
  CHECK_THROWS_AS(det.step(stream[4]), ConfigError);
}

TEST_CASE("detector config validation") {
  DetectorConfig cfg = frob_config(6, 2, 2, {2, 2, 2});
  cfg.schedule.kind = ScheduleKind::Kernel;
  CHECK_THROWS_AS(Detector(cfg, {6, 6, 2}), ConfigError);
  cfg = frob_config(6, 2, 2, {7, 2, 2});
  CHECK_THROWS_AS(Detector(cfg, {6, 6, 2}), ConfigError);
  DetectorConfig k = kernel_config(6, 2, 2, 0.3);
  k.directed = false;
  CHECK_THROWS_AS(Detector(k, {6, 5, 2}), ConfigError);
}

TEST_CASE("alarms are monotone in c_tau") {
  const auto stream = random_stream(8, 2, 12, 66);
  DetectorConfig cfg = frob_config(8, 2, 2, {2, 2, 2});
  const double r = max_ratio_run(stream, cfg);
  for (double c : log_grid(0.01, 10, 31)) {
    cfg.schedule.c_tau = c;
    CHECK(run_detection(stream, cfg).alarm.has_value() == (r > c));
  }
}

TEST_CASE("detection is deterministic") {
  const auto stream = random_stream(8, 2, 12, 67);
  DetectorConfig cfg = frob_config(8, 2, 2, {2, 2, 2});
  cfg.schedule.c_tau = 0.05;
  const DetectionResult a = run_detection(stream, cfg), b = run_detection(stream, cfg);
  CHECK(a.alarm == b.alarm);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) CHECK(a.steps[k].max_ratio == b.steps[k].max_ratio);
}

TEST_CASE("log grid") {
  const auto g = log_grid(0.01, 10, 4);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(0.01));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(g[3] == doctest::Approx(10.0));
}

TEST_CASE("calibration") {
  const auto grid = log_grid(0.01, 10, 31);
  SUBCASE("identical training tensors pick the smallest grid value") {
    Rng rng = make_rng(68);
    const Tensor3 p = gen_sbm_prob(8, 2, 2, rng);
    const std::vector<Tensor3> training(8, sample_adjacency(p, true, rng));
    const CalibrationResult c = calibrate(training, 1, 0.05, grid, frob_config(8, 2, 2, {2, 2, 2}), 1);
    CHECK(c.c_tau == grid.front());
    CHECK_FALSE(c.saturated);
  }
  SUBCASE("alarm fraction never increases along the grid") {
    const auto training = random_stream(8, 2, 10, 69);
    const CalibrationResult c = calibrate(training, 10, 0.2, grid, frob_config(8, 2, 2, {2, 2, 2}), 2);
    REQUIRE(c.alarm_fraction.size() == grid.size());
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(c.alarm_fraction[k] <= c.alarm_fraction[k - 1]);
    const auto at = std::find(grid.begin(), grid.end(), c.c_tau) - grid.begin();
    CHECK(c.alarm_fraction[static_cast<std::size_t>(at)] <= 0.2);
    if (at > 0) CHECK(c.alarm_fraction[static_cast<std::size_t>(at) - 1] > 0.2);
    const CalibrationResult again = calibrate(training, 10, 0.2, grid, frob_config(8, 2, 2, {2, 2, 2}), 2);
    CHECK(again.ratios == c.ratios);
  }
  SUBCASE("saturation is flagged") {
    const auto training = random_stream(8, 2, 10, 70);
    const CalibrationResult c = calibrate(training, 5, 0.05, {1e-6, 2e-6}, frob_config(8, 2, 2, {2, 2, 2}), 3);
    CHECK(c.saturated);
    CHECK(c.c_tau == 2e-6);
  }
  SUBCASE("bad input") {
    const auto cfg = frob_config(8, 2, 2, {2, 2, 2});
    CHECK_THROWS_AS(calibrate({}, 1, 0.05, grid, cfg, 1), ConfigError);
    CHECK_THROWS_AS(calibrate(random_stream(8, 2, 3, 1), 1, 0.05, grid, cfg, 1), ConfigError);
    CHECK_THROWS_AS(calibrate(random_stream(8, 2, 6, 1), 1, 0.05, {0.2, 0.1}, cfg, 1), ConfigError);
  }
}

TEST_CASE("metrics") {
  using Est = std::vector<std::optional<std::size_t>>;
  const Metrics all_next = evaluate(Est(5, std::size_t{51}), 50, 100);
  CHECK(all_next.delay == 1.0);
  CHECK(all_next.pfa == 0.0);
  CHECK(all_next.pfn == 0.0);
  Est mixed(10, std::size_t{52});
  mixed[3] = 49;
  const Metrics m = evaluate(mixed, 50, 100);
  CHECK(m.pfa == doctest::Approx(0.1));
  CHECK(m.delay == 2.0);
  const Metrics none = evaluate(Est(4, std::nullopt), 50, 100);
  CHECK(none.pfn == 1.0);
  CHECK(none.delay == 50.0);
  CHECK(none.pfa == 0.0);
  CHECK(std::isnan(evaluate(Est(2, std::size_t{3}), 50, 100).delay));
}
