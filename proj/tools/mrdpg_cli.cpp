#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrdpg/error.hpp"
#include "mrdpg/experiment.hpp"
#include "mrdpg/spectral.hpp"
#include "mrdpg/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace mrdpg;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> method;
  std::optional<std::string> statistic;
  std::optional<double> alpha;
  std::optional<double> c_tau;
  std::optional<std::size_t> training;
  std::optional<std::size_t> permutations;
  std::vector<double> grid;  // lo, hi, count
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)");
  cmd->add_option("--seed", o.seed, "experiment seed");
  cmd->add_option("--trials", o.trials, "number of Monte Carlo trials");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_detector_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--method", o.method, "estimator")->check(CLI::IsMember({"thpca", "hosvd1"}));
  cmd->add_option("--statistic", o.statistic, "scan statistic")->check(CLI::IsMember({"frob", "kernel"}));
  cmd->add_option("--alpha", o.alpha, "tolerance level");
  cmd->add_option("--c-tau", o.c_tau, "threshold constant");
}

void add_calibration_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--training", o.training, "training length when generating");
  cmd->add_option("--permutations", o.permutations, "permutations B");
  cmd->add_option("--grid", o.grid, "c_tau grid: lo hi count")->expected(3);
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << bytes;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, p);
}

void write_json(const fs::path& p, const Json& j) { write_atomic(p, j.dump(2) + "\n"); }

bool is_csv(const fs::path& p) { return p.extension() == ".csv"; }

Tensor3 read_tensor(const fs::path& p) {
  if (!is_csv(p)) return io::read_mrt3(p);
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return io::read_csv(in);
}

void write_tensor(const fs::path& p, const Tensor3& t) {
  std::ostringstream os;
  if (is_csv(p)) io::write_csv(os, t);
  else io::write_mrt3(os, t);
  write_atomic(p, os.str());
}

std::string numbered(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, k, ext);
  return buf;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind(prefix, 0) == 0 && entry.path().extension() == ext) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<fs::path> trial_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("trial_", 0) == 0) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) out.push_back(dir);
  return out;
}

std::vector<Tensor3> load_stream(const fs::path& dir) {
  const auto files = list_files(dir, "stream_", ".mrt3");
  if (files.empty()) throw IoError("no stream_*.mrt3 files in " + dir.string());
  std::vector<Tensor3> out;
  for (const auto& f : files) out.push_back(io::read_mrt3(f));
  return out;
}

void apply(ExperimentConfig& e, const Overrides& o) {
  if (o.seed) e.seed = *o.seed;
  if (o.trials) e.trials = *o.trials;
  if (o.method) e.detector.estimator = *o.method == "thpca" ? EstimatorKind::THPCA : EstimatorKind::HOSVD1;
  if (o.statistic) {
    e.detector.statistic = *o.statistic == "frob" ? StatisticKind::Frobenius : StatisticKind::Kernel;
  }
  if (o.alpha) e.detector.schedule.alpha = *o.alpha;
  if (o.c_tau) e.detector.schedule.c_tau = *o.c_tau;
  if (o.training) e.calibration.training = *o.training;
  if (o.permutations) e.calibration.permutations = *o.permutations;
  if (o.grid.size() == 3) {
    if (o.grid[2] < 1 || o.grid[2] != static_cast<double>(static_cast<std::size_t>(o.grid[2]))) {
      throw ConfigError("--grid count must be a positive integer");
    }
    e.calibration.lo = o.grid[0];
    e.calibration.hi = o.grid[1];
    e.calibration.count = static_cast<std::size_t>(o.grid[2]);
  }
}

// Config from --config, or from a stream directory's manifest, then flags.
ExperimentConfig resolve(const Overrides& o, const std::optional<fs::path>& stream_dir = std::nullopt) {
  ExperimentConfig e;
  if (!o.config.empty()) {
    e = load_experiment(o.config);
  } else if (stream_dir && fs::exists(*stream_dir / "manifest.json")) {
    e = experiment_from_json(read_json(*stream_dir / "manifest.json").at("config"));
  } else {
    e = experiment_from_json(Json::object());
  }
  apply(e, o);
  finalize(e);
  return e;
}

// ---- simulate ----

struct SimulateArgs {
  Overrides o;
  std::string out;
  bool truth = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const ExperimentConfig e = resolve(a.o);
  const fs::path root(a.out);
  const ProbModel base = base_model(e.scenario, e.seed);
  parallel_for(e.trials, a.o.jobs, [&](std::size_t k) {
    const fs::path dir = e.trials > 1 ? root / numbered("trial", k, "") : root;
    DynamicStream stream(change_scenario(e.scenario), base, trial_seed(e.seed, k));
    Json files = Json::array();
    while (!stream.done()) {
      const Tensor3 a_t = stream.next();
      const std::string name = numbered("stream", stream.time(), ".mrt3");
      write_tensor(dir / name, a_t);
      if (a.truth) write_tensor(dir / numbered("prob", stream.time(), ".mrt3"), stream.last_probability());
      files.push_back(name);
    }
    Json manifest;
    manifest["trial"] = k;
    manifest["seed"] = trial_seed(e.seed, k);
    manifest["scenario"] = e.scenario.label();
    manifest["T"] = e.scenario.horizon;
    manifest["delta"] = stream.change_point() ? Json(*stream.change_point()) : Json(nullptr);
    manifest["files"] = std::move(files);
    manifest["config"] = to_json(e);
    write_json(dir / "manifest.json", manifest);
  });
  return 0;
}

// ---- estimate ----

struct EstimateArgs {
  std::string input;
  std::string method = "thpca";
  std::vector<int> ranks;
  std::string truth;
  std::string out;
  std::string report;
  std::string sweep;
  std::string plot;
  std::size_t jobs = 1;
};

Tensor3 run_estimator(const Tensor3& a, const std::string& method, const TuckerRanks& r) {
  if (method == "thpca") return thpca(a, r);
  if (method == "hosvd") return hosvd_project(a, r);
  if (method == "hosvd1") return hosvd_rank1(a);
  return a;  // raw
}

TuckerRanks ranks_for(const std::vector<int>& given, const Dims3& dims) {
  if (given.empty()) return default_ranks(dims);
  TuckerRanks r{given[0], given[1], given[2]};
  validate_ranks(r, dims);
  return r;
}

std::string svg_chart(const std::string& xlabel, const std::vector<double>& xs,
                      const std::map<std::string, std::vector<double>>& series) {
  const double w = 640, h = 400, pad = 60;
  double ymax = 0.0;
  for (const auto& [name, ys] : series)
    for (double y : ys) ymax = std::max(ymax, y);
  if (!(ymax > 0.0)) ymax = 1.0;
  const double xmin = xs.front(), xmax = xs.size() > 1 ? xs.back() : xs.front() + 1.0;
  auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto py = [&](double y) { return h - pad - y / ymax * (h - 2 * pad); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"15\" y=\"" << h / 2 << "\" transform=\"rotate(-90 15 " << h / 2
     << ")\" text-anchor=\"middle\">median Frobenius error</text>\n";
  for (double x : xs) {
    os << "<text x=\"" << px(x) << "\" y=\"" << h - pad + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << format_double(x) << "</text>\n";
  }
  os << "<text x=\"" << pad - 6 << "\" y=\"" << py(ymax) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
     << format_double(ymax) << "</text>\n";
  std::size_t c = 0;
  for (const auto& [name, ys] : series) {
    const char* col = colors[c % 5];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < ys.size(); ++k) os << px(xs[k]) << ',' << py(ys[k]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << w - pad + 5 << "\" y=\"" << pad + 16 * c << "\" fill=\"" << col
       << "\" font-size=\"12\">" << name << "</text>\n";
    ++c;
  }
  os << "</svg>\n";
  return os.str();
}

// Error of each estimator on SBM data over a grid of (n, L).
int cmd_sweep(const EstimateArgs& a) {
  const Json cfg = read_json(a.sweep);
  const std::vector<std::size_t> ns = cfg.value("n", std::vector<std::size_t>{50});
  const std::vector<std::size_t> Ls = cfg.value("L", std::vector<std::size_t>{10});
  const int k = cfg.value("communities", 4);
  const std::size_t trials = cfg.value("trials", std::size_t{10});
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
  const std::vector<std::string> methods = cfg.value(
      "methods", std::vector<std::string>{"thpca", "hosvd", "hosvd1", "raw"});
  for (const auto& m : methods) {
    if (m != "thpca" && m != "hosvd" && m != "hosvd1" && m != "raw") throw ConfigError("sweep: unknown method " + m);
  }
  struct Cell {
    std::size_t n, L, trial;
  };
  std::vector<Cell> cells;
  for (std::size_t n : ns)
    for (std::size_t L : Ls)
      for (std::size_t t = 0; t < trials; ++t) cells.push_back({n, L, t});
  std::vector<std::vector<double>> errors(cells.size());
  parallel_for(cells.size(), a.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    Rng rng = make_rng(trial_seed(seed, c));
    const Tensor3 p = gen_sbm_prob(cell.n, cell.L, k, rng);
    const Tensor3 adj = sample_adjacency(p, true, rng);
    const TuckerRanks r = default_ranks(adj.dims());
    for (const auto& m : methods) errors[c].push_back(frobenius_norm(run_estimator(adj, m, r) - p));
  });
  std::ostringstream csv;
  csv << "n,L,trial,method,error\n";
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t m = 0; m < methods.size(); ++m)
      csv << cells[c].n << ',' << cells[c].L << ',' << cells[c].trial << ',' << methods[m] << ','
          << format_double(errors[c][m]) << '\n';
  if (!a.report.empty()) write_atomic(a.report, csv.str());
  else std::cout << csv.str();
  if (!a.plot.empty()) {
    const bool by_n = ns.size() > 1 || Ls.size() == 1;
    std::vector<double> xs;
    for (std::size_t v : by_n ? ns : Ls) xs.push_back(static_cast<double>(v));
    std::map<std::string, std::vector<double>> series;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (std::size_t v : by_n ? ns : Ls) {
        std::vector<double> vals;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const bool hit = by_n ? cells[c].n == v && cells[c].L == Ls.front() : cells[c].L == v && cells[c].n == ns.front();
          if (hit) vals.push_back(errors[c][m]);
        }
        std::sort(vals.begin(), vals.end());
        const std::size_t h = vals.size() / 2;
        series[methods[m]].push_back(vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]));
      }
    }
    write_atomic(a.plot, svg_chart(by_n ? "n" : "L", xs, series));
  }
  return 0;
}

int cmd_estimate(const EstimateArgs& a) {
  if (!a.sweep.empty()) return cmd_sweep(a);
  if (a.input.empty()) throw ConfigError("estimate needs --input or --sweep");
  const Tensor3 in = read_tensor(a.input);
  const TuckerRanks r = ranks_for(a.ranks, in.dims());
  const Tensor3 est = run_estimator(in, a.method, r);
  if (!a.out.empty()) write_tensor(a.out, est);
  std::string error;
  if (!a.truth.empty()) {
    const Tensor3 p = read_tensor(a.truth);
    if (p.dims() != in.dims()) throw ConfigError("truth tensor dimensions differ from the input");
    error = format_double(frobenius_norm(est - p));
    std::cout << "error " << error << '\n';
  }
  if (!a.report.empty()) {
    std::ostringstream csv;
    csv << "input,method,r1,r2,r3,error\n"
        << fs::path(a.input).filename().string() << ',' << a.method << ',' << r.r1 << ',' << r.r2 << ','
        << r.r3 << ',' << error << '\n';
    write_atomic(a.report, csv.str());
  }
  return 0;
}

// ---- detect ----

struct DetectArgs {
  Overrides o;
  std::string input;
  std::string out;
  std::string calibration;
};

int cmd_detect(DetectArgs a) {
  if (a.out.empty()) throw ConfigError("detect needs --out");
  if (!a.calibration.empty() && !a.o.c_tau) a.o.c_tau = read_json(a.calibration).at("c_tau").get<double>();
  const fs::path out(a.out);
  if (!a.input.empty()) {
    const auto dirs = trial_dirs(a.input);
    parallel_for(dirs.size(), a.o.jobs, [&](std::size_t k) {
      const ExperimentConfig e = resolve(a.o, dirs[k]);
      TrialResult r;
      r.trial = k;
      r.seed = 0;
      if (fs::exists(dirs[k] / "manifest.json")) {
        const Json m = read_json(dirs[k] / "manifest.json");
        r.trial = m.at("trial").get<std::size_t>();
        r.seed = m.at("seed").get<std::uint64_t>();
      }
      r.detection = run_detection(load_stream(dirs[k]), e.detector);
      write_json(out / numbered("result", r.trial, ".json"), result_to_json(r, e));
    });
    return 0;
  }
  if (a.o.config.empty()) throw ConfigError("detect needs --input or --config");
  const ExperimentConfig e = resolve(a.o);
  for (const auto& r : run_trials(e, a.o.jobs)) {
    write_json(out / numbered("result", r.trial, ".json"), result_to_json(r, e));
  }
  return 0;
}

// ---- calibrate ----

struct CalibrateArgs {
  Overrides o;
  std::string input;
  std::string out;
};

Json calibration_json(const CalibrationResult& c, const ExperimentConfig& e) {
  Json j;
  j["c_tau"] = c.c_tau;
  j["saturated"] = c.saturated;
  j["alpha"] = e.detector.schedule.alpha;
  j["permutations"] = c.ratios.size();
  j["grid"] = c.grid;
  j["alarm_fraction"] = c.alarm_fraction;
  j["ratios"] = c.ratios;
  j["config"] = to_json(e);
  return j;
}

int cmd_calibrate(const CalibrateArgs& a) {
  if (a.out.empty()) throw ConfigError("calibrate needs --out");
  std::optional<fs::path> dir;
  if (!a.input.empty()) dir = fs::path(a.input);
  ExperimentConfig e = resolve(a.o, dir);
  std::vector<Tensor3> training;
  if (dir) {
    training = load_stream(*dir);
    e.calibration.training = training.size();
  } else {
    training = training_stream(e);
  }
  const CalibrationResult c = calibrate(training, e.calibration.permutations, e.detector.schedule.alpha,
                                        calibration_grid(e.calibration), e.detector, permutation_seed(e.seed));
  if (c.saturated) std::cerr << "warning: no grid value met alpha; using the grid maximum\n";
  write_json(a.out, calibration_json(c, e));
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string input;
  std::string out;
  std::optional<std::size_t> delta;
  std::optional<std::size_t> horizon;
  std::string label;
};

int cmd_eval(const EvalArgs& a) {
  const auto files = list_files(a.input, "result_", ".json");
  if (files.empty()) throw IoError("no result_*.json files in " + a.input);
  std::vector<std::optional<std::size_t>> alarms;
  ExperimentConfig e;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const Json j = read_json(files[k]);
    if (k == 0) e = experiment_from_json(j.at("config"));
    alarms.push_back(j.at("alarm_time").is_null() ? std::nullopt
                                                  : std::optional<std::size_t>(j.at("alarm_time").get<std::size_t>()));
  }
  ScenarioConfig s = e.scenario;
  if (a.horizon) s.horizon = *a.horizon;
  const Metrics m = a.delta ? evaluate(alarms, *a.delta, s.horizon) : scenario_metrics(alarms, s);
  const std::string label = a.label.empty() ? e.scenario.label() : a.label;
  const std::string csv = std::string(kMetricsHeader) + "\n" +
                          metrics_row(label, e.scenario.n1, e.scenario.L, e.scenario.d,
                                      to_string(e.detector.estimator) + "-" + to_string(e.detector.statistic), m) +
                          "\n";
  if (a.out.empty()) std::cout << csv;
  else write_atomic(a.out, csv);
  return 0;
}

// ---- run ----

struct RunArgs {
  Overrides o;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  if (a.o.config.empty()) throw ConfigError("run needs --config");
  if (a.out.empty()) throw ConfigError("run needs --out");
  ExperimentConfig e = resolve(a.o);
  const fs::path out(a.out);
  if (a.o.c_tau) {
    // Fixed constant: skip calibration.
    for (const auto& r : run_trials(e, a.o.jobs)) {
      write_json(out / "results" / numbered("result", r.trial, ".json"), result_to_json(r, e));
    }
  } else {
    const ExperimentSummary s = run_experiment(e, a.o.jobs);
    e.detector.schedule.c_tau = s.calibration.c_tau;
    write_json(out / "calibration.json", calibration_json(s.calibration, e));
    for (const auto& r : s.trials) write_json(out / "results" / numbered("result", r.trial, ".json"), result_to_json(r, e));
  }
  EvalArgs ev;
  ev.input = (out / "results").string();
  ev.out = (out / "metrics.csv").string();
  return cmd_eval(ev);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Change point detection in multilayer random dot product graphs"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "write seeded adjacency streams");
  add_common(simulate, sim.o);
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_flag("--truth", sim.truth, "also write the probability tensors");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "denoise one tensor or run an estimation sweep");
  estimate->add_option("--input", est.input, "MRT3 or CSV tensor");
  estimate->add_option("--method", est.method)->check(CLI::IsMember({"thpca", "hosvd", "hosvd1", "raw"}));
  estimate->add_option("--ranks", est.ranks, "Tucker ranks r1 r2 r3")->expected(3)->delimiter(',');
  estimate->add_option("--truth", est.truth, "probability tensor for the error report");
  estimate->add_option("--out", est.out, "estimate output (MRT3 or .csv)");
  estimate->add_option("--report", est.report, "error report CSV");
  estimate->add_option("--sweep", est.sweep, "sweep config (JSON)");
  estimate->add_option("--plot", est.plot, "SVG chart of the sweep");
  estimate->add_option("--jobs", est.jobs, "worker threads for --sweep")->check(CLI::PositiveNumber);

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "run the online detector");
  add_common(detect, det.o);
  add_detector_flags(detect, det.o);
  detect->add_option("--input", det.input, "stream directory from simulate");
  detect->add_option("--calibration", det.calibration, "calibrate output providing c_tau");
  detect->add_option("--out", det.out, "result directory");

  CalibrateArgs cal;
  auto* calib = app.add_subcommand("calibrate", "choose c_tau by permuting a training stream");
  add_common(calib, cal.o);
  add_detector_flags(calib, cal.o);
  add_calibration_flags(calib, cal.o);
  calib->add_option("--input", cal.input, "training stream directory");
  calib->add_option("--out", cal.out, "output JSON");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "PFA, PFN and delay over result files");
  eval->add_option("--input", ev.input, "result directory")->required();
  eval->add_option("--delta", ev.delta, "change time");
  eval->add_option("--T", ev.horizon, "horizon");
  eval->add_option("--label", ev.label, "scenario label for the CSV row");
  eval->add_option("--out", ev.out, "metrics CSV");

  RunArgs run;
  auto* runcmd = app.add_subcommand("run", "calibrate, detect on every trial, and evaluate");
  add_common(runcmd, run.o);
  add_detector_flags(runcmd, run.o);
  add_calibration_flags(runcmd, run.o);
  runcmd->add_option("--out", run.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*estimate) return cmd_estimate(est);
    if (*detect) return cmd_detect(det);
    if (*calib) return cmd_calibrate(cal);
    if (*eval) return cmd_eval(ev);
    if (*runcmd) return cmd_run(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
