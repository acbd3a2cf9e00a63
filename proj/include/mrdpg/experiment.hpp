#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrdpg/detector.hpp"
#include "mrdpg/models.hpp"

namespace mrdpg {

using Json = nlohmann::ordered_json;

enum class ModelFamily { SBM, Dirichlet };

// Scenario block of an experiment config.
struct ScenarioConfig {
  ModelFamily model = ModelFamily::SBM;
  ChangeKind variant = ChangeKind::None;
  std::size_t n1 = 50;
  std::size_t n2 = 50;
  int d = 4;  // communities (SBM) or latent dimension (Dirichlet)
  std::size_t L = 4;
  std::size_t horizon = 100;
  std::size_t delta = 50;
  int new_communities = 8;
  bool directed = false;  // Dirichlet only
  Vector head_c, tail_c, post_head, post_tail;

  void validate() const;
  std::string label() const;  // "<model>-<variant>"
};

struct CalibrationConfig {
  std::size_t training = 75;
  std::size_t permutations = 100;
  double lo = 0.01;
  double hi = 10.0;
  std::size_t count = 61;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  DetectorConfig detector;
  bool bandwidth_given = false;
  CalibrationConfig calibration;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
};

ScenarioConfig scenario_from_json(const Json& j);
Json to_json(const ScenarioConfig& s);
// Detector block; schedule sizes and the bandwidth are completed by finalize().
DetectorConfig detector_from_json(const Json& j, bool* bandwidth_given = nullptr);
Json to_json(const DetectorConfig& d);
ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& e);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Fills the schedule sizes (d, m, n, L / h, n_eff, n_max), kernel L, the
// default bandwidth and the grid seed from the scenario and seed.
void finalize(ExperimentConfig& e);

// Seed streams derived from the experiment seed.
std::uint64_t model_seed(std::uint64_t seed);
std::uint64_t training_seed(std::uint64_t seed);
std::uint64_t permutation_seed(std::uint64_t seed);
std::uint64_t grid_seed(std::uint64_t seed);

// Weights and SBM layer values, drawn once per experiment.
ProbModel base_model(const ScenarioConfig& s, std::uint64_t seed);
ChangeScenario change_scenario(const ScenarioConfig& s);
std::vector<Tensor3> trial_stream(const ExperimentConfig& e, std::size_t trial);
// Pre-change sample of length calibration.training.
std::vector<Tensor3> training_stream(const ExperimentConfig& e);

std::vector<double> calibration_grid(const CalibrationConfig& c);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  DetectionResult detection;
};

Json result_to_json(const TrialResult& r, const ExperimentConfig& e);

// Runs fn(0..count-1) on up to `jobs` threads; exceptions are rethrown in index order.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::vector<TrialResult> run_trials(const ExperimentConfig& e, std::size_t jobs);

struct ExperimentSummary {
  CalibrationResult calibration;
  std::vector<TrialResult> trials;
  Metrics metrics;
};

// Calibrate C_tau on the training stream, then detect on every trial.
ExperimentSummary run_experiment(ExperimentConfig e, std::size_t jobs);

// Metrics for a scenario; with no change every alarm counts as false and PFN is 0.
Metrics scenario_metrics(const std::vector<std::optional<std::size_t>>& alarms, const ScenarioConfig& s);

// One CSV row "scenario,n,L,d,method,pfa,pfn,delay" (delay empty when undefined).
std::string metrics_row(const std::string& scenario, std::size_t n, std::size_t L, int d,
                        const std::string& method, const Metrics& m);
inline constexpr const char* kMetricsHeader = "scenario,n,L,d,method,pfa,pfn,delay";

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace mrdpg
