#include <cmath>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mrdpg/detector.hpp"
#include "mrdpg/error.hpp"
#include "mrdpg/experiment.hpp"
#include "mrdpg/scan.hpp"
#include "mrdpg/spectral.hpp"

namespace py = pybind11;
using namespace mrdpg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor3 to_tensor(const Array& a) {
  if (a.ndim() != 3) throw ConfigError("expected a 3-dimensional array");
  const Dims3 dims{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                   static_cast<std::size_t>(a.shape(2))};
  return Tensor3(dims, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor3& t) {
  Array out({t.dim(1), t.dim(2), t.dim(3)});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Tensor3 to_probability(const Array& a) {
  Tensor3 t = to_tensor(a);
  t.mark_probability();
  return t;
}

TuckerRanks to_ranks(const std::tuple<int, int, int>& r) {
  return {std::get<0>(r), std::get<1>(r), std::get<2>(r)};
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig e = experiment_from_json(Json::parse(text));
  finalize(e);
  return e;
}

py::list stream_list(const std::vector<Tensor3>& s) {
  py::list out;
  for (const auto& t : s) out.append(to_array(t));
  return out;
}

std::vector<Tensor3> from_list(const std::vector<Array>& s) {
  std::vector<Tensor3> out;
  for (const auto& a : s) out.push_back(to_tensor(a));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multilayer random dot product graph estimation and change point detection";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("matricize", [](const Array& a, int mode) { return Matrix(matricize(to_tensor(a), mode)); });
  m.def("mode_multiply", [](const Array& a, int mode, const Matrix& u) {
    return to_array(mode_multiply(to_tensor(a), mode, u));
  });

  m.def("thpca", [](const Array& a, std::tuple<int, int, int> r) { return to_array(thpca(to_tensor(a), to_ranks(r))); },
        py::arg("a"), py::arg("ranks"));
  m.def("hosvd_project",
        [](const Array& a, std::tuple<int, int, int> r) { return to_array(hosvd_project(to_tensor(a), to_ranks(r))); },
        py::arg("a"), py::arg("ranks"));
  m.def("hosvd_rank1", [](const Array& a) { return to_array(hosvd_rank1(to_tensor(a))); });
  m.def("hpca", [](const Matrix& s, int r) { return Matrix(hpca(s, r).basis); });

  m.def("gen_sbm_prob", [](std::size_t n, std::size_t L, int k, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return to_array(gen_sbm_prob(n, L, k, rng));
  }, py::arg("n"), py::arg("L"), py::arg("communities"), py::arg("seed"));
  m.def("sample_adjacency", [](const Array& p, bool symmetric, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return to_array(sample_adjacency(to_probability(p), symmetric, rng));
  }, py::arg("p"), py::arg("symmetric"), py::arg("seed"));

  m.def("bands", [](std::size_t n1, std::size_t n2, bool directed) {
    const DiagonalBands b = directed ? build_bands_directed(n1, n2) : build_bands_undirected(n1);
    return b.bands;
  }, py::arg("n1"), py::arg("n2"), py::arg("directed") = false);
  m.def("band_size_closed_form", &band_size_closed_form);
  m.def("default_bandwidth", &default_bandwidth);
  m.def("grid_size", [](double alpha, std::size_t t, std::size_t n, std::size_t L, double c_m) {
    return grid_size(alpha, t, n, L, c_m);
  });
  m.def("fixed_latent_threshold", &fixed_latent_threshold, py::arg("c_tau"), py::arg("d"), py::arg("m"),
        py::arg("n"), py::arg("L"), py::arg("alpha"), py::arg("s"), py::arg("t"));
  m.def("kernel_threshold", &kernel_threshold, py::arg("c_tau"), py::arg("h"), py::arg("L"), py::arg("d"),
        py::arg("n_eff"), py::arg("n_max"), py::arg("alpha"), py::arg("s"), py::arg("t"));
  m.def("frob_scan", [](const Array& a, const Array& b) { return frob_scan(to_tensor(a), to_tensor(b)); });

  // JSON-in, JSON-out experiment entry points; the Python wrapper handles (de)serialisation.
  m.def("_trial_stream", [](const std::string& cfg, std::size_t trial) {
    return stream_list(trial_stream(parse_config(cfg), trial));
  });
  m.def("_detect", [](const std::string& cfg, const std::vector<Array>& stream) {
    const ExperimentConfig e = parse_config(cfg);
    TrialResult r;
    r.detection = run_detection(from_list(stream), e.detector);
    return result_to_json(r, e).dump();
  });
  m.def("_run_experiment", [](const std::string& cfg, std::size_t jobs) {
    ExperimentConfig e = experiment_from_json(Json::parse(cfg));
    ExperimentSummary s;
    {
      py::gil_scoped_release release;
      s = run_experiment(e, jobs);
    }
    Json out;
    out["c_tau"] = s.calibration.c_tau;
    out["saturated"] = s.calibration.saturated;
    Json alarms = Json::array();
    for (const auto& t : s.trials) alarms.push_back(t.detection.alarm ? Json(*t.detection.alarm) : Json(nullptr));
    out["alarms"] = alarms;
    out["pfa"] = s.metrics.pfa;
    out["pfn"] = s.metrics.pfn;
    out["delay"] = std::isnan(s.metrics.delay) ? Json(nullptr) : Json(s.metrics.delay);
    return out.dump();
  }, py::arg("config"), py::arg("jobs") = 1);
}
