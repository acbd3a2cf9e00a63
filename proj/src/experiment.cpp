#include "mrdpg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "mrdpg/error.hpp"

namespace mrdpg {

namespace {

constexpr std::uint64_t kSeedBase = 1ULL << 62;

void check_keys(const Json& j, const char* block, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(block) + " block must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(std::string(block) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

// A scalar c means c * 1_d.
Vector concentration(const Json& j, const char* key, int d, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return Vector::Constant(d, fallback);
  const Json& v = j.at(key);
  if (v.is_number()) return Vector::Constant(d, v.get<double>());
  if (!v.is_array()) throw ConfigError(std::string("concentration '") + key + "' must be a number or list");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
  return out;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

std::string model_name(ModelFamily m) { return m == ModelFamily::SBM ? "sbm" : "dirichlet"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void ScenarioConfig::validate() const {
  if (n1 == 0 || n2 == 0 || L == 0 || d < 1) throw ConfigError("scenario: n1, n2, L and d must be positive");
  if (horizon < 1) throw ConfigError("scenario: T must be at least 1");
  if (model == ModelFamily::SBM) {
    if (n1 != n2 || directed) throw ConfigError("scenario: the SBM is undirected with n1 == n2");
    if (static_cast<std::size_t>(d) > n1) throw ConfigError("scenario: more communities than nodes");
  } else {
    if (!directed && n1 != n2) throw ConfigError("scenario: undirected Dirichlet model needs n1 == n2");
    for (const Vector* c : {&head_c, &tail_c, &post_head, &post_tail}) {
      if (c->size() != d || !(c->array() > 0.0).all()) {
        throw ConfigError("scenario: concentrations must be positive with length d");
      }
    }
  }
  switch (variant) {
    case ChangeKind::DimensionChanged:
    case ChangeKind::UnlabeledSBM:
      if (model != ModelFamily::SBM) throw ConfigError("scenario: " + to_string(variant) + " needs the SBM");
      break;
    case ChangeKind::DirichletShift:
      if (model != ModelFamily::Dirichlet) throw ConfigError("scenario: dirichlet_shift needs the Dirichlet model");
      break;
    case ChangeKind::NodesPermuted:
      if (n1 != n2) throw ConfigError("scenario: nodes_permuted needs n1 == n2");
      break;
    default:
      break;
  }
  change_scenario(*this).validate();
}

std::string ScenarioConfig::label() const { return model_name(model) + "-" + to_string(variant); }

ScenarioConfig scenario_from_json(const Json& j) {
  check_keys(j, "scenario", {"model", "variant", "n", "n1", "n2", "d", "communities", "L", "T", "delta",
                             "new_communities", "directed", "concentrations"});
  ScenarioConfig s;
  const std::string model = get_or<std::string>(j, "model", "sbm");
  if (model == "sbm") s.model = ModelFamily::SBM;
  else if (model == "dirichlet") s.model = ModelFamily::Dirichlet;
  else throw ConfigError("scenario: unknown model '" + model + "'");
  s.variant = parse_change_kind(get_or<std::string>(j, "variant", "none"));
  const std::size_t n = get_count(j, "n", 50);
  s.n1 = get_count(j, "n1", n);
  s.n2 = get_count(j, "n2", n);
  s.d = static_cast<int>(get_count(j, "d", get_count(j, "communities", 4)));
  s.L = get_count(j, "L", 4);
  s.horizon = get_count(j, "T", 100);
  s.delta = get_count(j, "delta", s.variant == ChangeKind::None ? 0 : s.horizon / 2);
  s.new_communities = static_cast<int>(get_count(j, "new_communities", 8));
  s.directed = get_or<bool>(j, "directed", false);
  const Json conc = j.contains("concentrations") ? j.at("concentrations") : Json::object();
  check_keys(conc, "concentrations", {"head", "tail", "post_head", "post_tail"});
  s.head_c = concentration(conc, "head", s.d, 1.0);
  s.tail_c = concentration(conc, "tail", s.d, s.directed ? 10.0 : 1.0);
  s.post_head = concentration(conc, "post_head", s.d, 500.0);
  s.post_tail = concentration(conc, "post_tail", s.d, s.directed ? 1000.0 : 500.0);
  if (!s.directed) {
    s.tail_c = s.head_c;
    s.post_tail = s.post_head;
  }
  s.validate();
  return s;
}

Json to_json(const ScenarioConfig& s) {
  Json j;
  j["model"] = model_name(s.model);
  j["variant"] = to_string(s.variant);
  j["n1"] = s.n1;
  j["n2"] = s.n2;
  j["d"] = s.d;
  j["L"] = s.L;
  j["T"] = s.horizon;
  j["delta"] = s.variant == ChangeKind::None ? Json(nullptr) : Json(s.delta);
  if (s.model == ModelFamily::SBM) {
    j["new_communities"] = s.new_communities;
  } else {
    j["directed"] = s.directed;
    j["concentrations"] = {{"head", vector_json(s.head_c)},
                           {"tail", vector_json(s.tail_c)},
                           {"post_head", vector_json(s.post_head)},
                           {"post_tail", vector_json(s.post_tail)}};
  }
  return j;
}

DetectorConfig detector_from_json(const Json& j, bool* bandwidth_given) {
  check_keys(j, "detector", {"method", "statistic", "ranks", "alpha", "c_tau", "kernel", "bandwidth",
                             "s_stride", "min_segment", "c_m", "m_min", "m_max", "grid_t", "regrow_grid",
                             "kernel_uses_estimator", "d", "m"});
  DetectorConfig c;
  const std::string method = get_or<std::string>(j, "method", "thpca");
  if (method == "thpca") c.estimator = EstimatorKind::THPCA;
  else if (method == "hosvd1") c.estimator = EstimatorKind::HOSVD1;
  else throw ConfigError("detector: unknown method '" + method + "'");
  const std::string stat = get_or<std::string>(j, "statistic", "frob");
  if (stat == "frob") c.statistic = StatisticKind::Frobenius;
  else if (stat == "kernel") c.statistic = StatisticKind::Kernel;
  else throw ConfigError("detector: unknown statistic '" + stat + "'");
  c.schedule.kind = c.statistic == StatisticKind::Kernel ? ScheduleKind::Kernel : ScheduleKind::FixedLatent;
  if (j.contains("ranks") && !j.at("ranks").is_null()) {
    const Json& r = j.at("ranks");
    if (!r.is_array() || r.size() != 3) throw ConfigError("detector: ranks must be [r1, r2, r3]");
    c.ranks = TuckerRanks{r[0].get<int>(), r[1].get<int>(), r[2].get<int>()};
  }
  c.schedule.alpha = get_or<double>(j, "alpha", 0.05);
  c.schedule.c_tau = get_or<double>(j, "c_tau", 1.0);
  // 0 marks "derive from the scenario" for finalize().
  c.schedule.d = get_or<double>(j, "d", 0.0);
  c.schedule.m = get_or<double>(j, "m", 0.0);
  const std::string kernel = get_or<std::string>(j, "kernel", "gaussian");
  if (kernel == "gaussian") c.kernel.family = KernelFamily::Gaussian;
  else if (kernel == "triangular") c.kernel.family = KernelFamily::Triangular;
  else throw ConfigError("detector: unknown kernel '" + kernel + "'");
  const bool has_h = j.contains("bandwidth") && !j.at("bandwidth").is_null();
  if (has_h) c.kernel.h = j.at("bandwidth").get<double>();
  if (bandwidth_given) *bandwidth_given = has_h;
  c.s_stride = get_count(j, "s_stride", 1);
  c.min_segment = get_count(j, "min_segment", 2);
  c.c_m = get_or<double>(j, "c_m", 1.0);
  c.grid_limits.m_min = get_count(j, "m_min", 64);
  c.grid_limits.m_max = get_count(j, "m_max", 20000);
  c.grid_t = get_count(j, "grid_t", 0);
  c.regrow_grid = get_or<bool>(j, "regrow_grid", false);
  c.kernel_uses_estimator = get_or<bool>(j, "kernel_uses_estimator", false);
  return c;
}

Json to_json(const DetectorConfig& c) {
  Json j;
  j["method"] = to_string(c.estimator);
  j["statistic"] = to_string(c.statistic);
  if (c.ranks) j["ranks"] = {c.ranks->r1, c.ranks->r2, c.ranks->r3};
  j["alpha"] = c.schedule.alpha;
  j["c_tau"] = c.schedule.c_tau;
  j["d"] = c.schedule.d;
  j["s_stride"] = c.s_stride;
  j["min_segment"] = c.min_segment;
  if (c.statistic == StatisticKind::Kernel) {
    j["kernel"] = c.kernel.family == KernelFamily::Gaussian ? "gaussian" : "triangular";
    j["bandwidth"] = c.kernel.h;
    j["c_m"] = c.c_m;
    j["m_min"] = c.grid_limits.m_min;
    j["m_max"] = c.grid_limits.m_max;
    j["grid_t"] = c.grid_t;
    j["regrow_grid"] = c.regrow_grid;
    j["kernel_uses_estimator"] = c.kernel_uses_estimator;
  } else {
    j["m"] = c.schedule.m;
  }
  return j;
}

ExperimentConfig experiment_from_json(const Json& j) {
  check_keys(j, "config", {"scenario", "detector", "calibration", "trials", "seed"});
  ExperimentConfig e;
  e.scenario = scenario_from_json(j.contains("scenario") ? j.at("scenario") : Json::object());
  e.detector = detector_from_json(j.contains("detector") ? j.at("detector") : Json::object(),
                                  &e.bandwidth_given);
  if (j.contains("calibration")) {
    const Json& c = j.at("calibration");
    check_keys(c, "calibration", {"training", "permutations", "lo", "hi", "count"});
    e.calibration.training = get_count(c, "training", 75);
    e.calibration.permutations = get_count(c, "permutations", 100);
    e.calibration.lo = get_or<double>(c, "lo", 0.01);
    e.calibration.hi = get_or<double>(c, "hi", 10.0);
    e.calibration.count = get_count(c, "count", 61);
  }
  e.trials = get_count(j, "trials", 1);
  e.seed = get_or<std::uint64_t>(j, "seed", 1);
  return e;
}

Json to_json(const ExperimentConfig& e) {
  Json j;
  j["scenario"] = to_json(e.scenario);
  j["detector"] = to_json(e.detector);
  j["calibration"] = {{"training", e.calibration.training},
                      {"permutations", e.calibration.permutations},
                      {"lo", e.calibration.lo},
                      {"hi", e.calibration.hi},
                      {"count", e.calibration.count}};
  j["trials"] = e.trials;
  j["seed"] = e.seed;
  return j;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError("config " + path.string() + ": " + err.what());
  }
  return experiment_from_json(j);
}

void finalize(ExperimentConfig& e) {
  const ScenarioConfig& s = e.scenario;
  DetectorConfig& c = e.detector;
  auto& sched = c.schedule;
  sched.kind = c.statistic == StatisticKind::Kernel ? ScheduleKind::Kernel : ScheduleKind::FixedLatent;
  if (sched.d <= 0.0) sched.d = s.d;
  if (sched.m <= 0.0) sched.m = static_cast<double>(s.L);
  sched.n = static_cast<double>(s.n1);
  sched.L = static_cast<double>(s.L);
  sched.n_eff = static_cast<double>(std::min(s.n1, s.n2));
  sched.n_max = static_cast<double>(std::max(s.n1, s.n2));
  c.kernel.L = s.L;
  if (!e.bandwidth_given) c.kernel.h = default_bandwidth(s.horizon, s.n1, s.n2, s.L);
  sched.h = c.kernel.h;
  c.directed = s.directed || s.n1 != s.n2;
  if (c.grid_t == 0) c.grid_t = s.horizon;
  c.grid_seed = grid_seed(e.seed);
  c.validate({s.n1, s.n2, s.L});
}

std::uint64_t model_seed(std::uint64_t seed) { return trial_seed(seed, kSeedBase); }
std::uint64_t training_seed(std::uint64_t seed) { return trial_seed(seed, kSeedBase + 1); }
std::uint64_t permutation_seed(std::uint64_t seed) { return trial_seed(seed, kSeedBase + 2); }
std::uint64_t grid_seed(std::uint64_t seed) { return trial_seed(seed, kSeedBase + 3); }

ProbModel base_model(const ScenarioConfig& s, std::uint64_t seed) {
  s.validate();
  Rng rng = make_rng(model_seed(seed));
  if (s.model == ModelFamily::SBM) return gen_sbm_model(s.n1, s.L, s.d, rng);
  ProbModel m;
  m.weights = gen_dirichlet_weights(s.d, s.L, rng);
  m.n1 = s.n1;
  m.n2 = s.n2;
  m.symmetric = !s.directed;
  m.latent_head = DirichletLatent{s.head_c};
  m.latent_tail = DirichletLatent{s.tail_c};
  return m;
}

ChangeScenario change_scenario(const ScenarioConfig& s) {
  ChangeScenario c;
  c.kind = s.variant;
  c.delta = s.delta;
  c.horizon = s.horizon;
  c.new_communities = s.new_communities;
  c.post_head = s.post_head;
  c.post_tail = s.post_tail;
  return c;
}

std::vector<Tensor3> trial_stream(const ExperimentConfig& e, std::size_t trial) {
  return gen_dynamic_stream(change_scenario(e.scenario), base_model(e.scenario, e.seed),
                            trial_seed(e.seed, trial));
}

std::vector<Tensor3> training_stream(const ExperimentConfig& e) {
  ChangeScenario null;
  null.kind = ChangeKind::None;
  null.horizon = e.calibration.training;
  return gen_dynamic_stream(null, base_model(e.scenario, e.seed), training_seed(e.seed));
}

std::vector<double> calibration_grid(const CalibrationConfig& c) { return log_grid(c.lo, c.hi, c.count); }

Json result_to_json(const TrialResult& r, const ExperimentConfig& e) {
  Json j;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["alarm_time"] = r.detection.alarm ? Json(*r.detection.alarm) : Json(nullptr);
  Json steps = Json::array();
  for (const auto& s : r.detection.steps) {
    steps.push_back({{"t", s.t},
                     {"max_statistic", s.max_statistic},
                     {"argmax_s", s.argmax_s},
                     {"threshold", s.threshold_at_argmax},
                     {"max_ratio", s.max_ratio}});
  }
  j["steps"] = std::move(steps);
  j["config"] = to_json(e);
  return j;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

std::vector<TrialResult> run_trials(const ExperimentConfig& e, std::size_t jobs) {
  std::vector<TrialResult> out(e.trials);
  parallel_for(e.trials, jobs, [&](std::size_t k) {
    out[k].trial = k;
    out[k].seed = trial_seed(e.seed, k);
    out[k].detection = run_detection(trial_stream(e, k), e.detector);
  });
  return out;
}

ExperimentSummary run_experiment(ExperimentConfig e, std::size_t jobs) {
  finalize(e);
  ExperimentSummary out;
  out.calibration = calibrate(training_stream(e), e.calibration.permutations, e.detector.schedule.alpha,
                              calibration_grid(e.calibration), e.detector, permutation_seed(e.seed));
  e.detector.schedule.c_tau = out.calibration.c_tau;
  out.trials = run_trials(e, jobs);
  std::vector<std::optional<std::size_t>> alarms;
  for (const auto& t : out.trials) alarms.push_back(t.detection.alarm);
  out.metrics = scenario_metrics(alarms, e.scenario);
  return out;
}

Metrics scenario_metrics(const std::vector<std::optional<std::size_t>>& alarms, const ScenarioConfig& s) {
  if (s.variant != ChangeKind::None) return evaluate(alarms, s.delta, s.horizon);
  // No change: every alarm is false; PFN and delay do not apply.
  Metrics m;
  m.trials = alarms.size();
  const auto fired = std::count_if(alarms.begin(), alarms.end(), [](const auto& a) { return a.has_value(); });
  m.pfa = alarms.empty() ? 0.0 : static_cast<double>(fired) / static_cast<double>(alarms.size());
  return m;
}

std::string metrics_row(const std::string& scenario, std::size_t n, std::size_t L, int d,
                        const std::string& method, const Metrics& m) {
  std::ostringstream os;
  os << scenario << ',' << n << ',' << L << ',' << d << ',' << method << ',' << format_double(m.pfa) << ','
     << format_double(m.pfn) << ',' << (std::isnan(m.delay) ? std::string() : format_double(m.delay));
  return os.str();
}

}  // namespace mrdpg
