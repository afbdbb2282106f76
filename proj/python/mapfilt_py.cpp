#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mapfilt/error.hpp"
#include "mapfilt/pipeline.hpp"
#include "mapfilt/privacy.hpp"
#include "mapfilt/sim_models.hpp"

namespace py = pybind11;
using namespace mapfilt;

namespace {

MultiSeries to_series(const Mat& values, std::vector<std::string> names) {
  MultiSeries x(values, std::move(names));
  x.validate();
  return x;
}

py::dict privatize_py(const Mat& values, const std::string& config, std::vector<std::string> names) {
  const PrivatizeResult res = privatize(to_series(values, std::move(names)), parse_config_json(config));
  py::dict out;
  out["y"] = res.y.values;
  out["names"] = res.y.names;
  out["privacy"] = res.report.privacy;
  out["rum"] = res.report.rum;
  out["smap_error"] = res.report.smap_error;
  out["theta"] = Eigen::VectorXd(res.report.theta.values());
  out["report"] = report_to_json(res.report);
  return out;
}

}  // namespace

PYBIND11_MODULE(_mapfilt, m) {
  m.doc() = "Spectral-density-preserving all-pass filters for releasing time series";

  py::register_exception<Error>(m, "MapfiltError", PyExc_RuntimeError);

  m.def("simulate", [](const std::string& model, Index T, std::uint64_t seed) {
    return simulate_model(builtin_model(model), T, seed).values;
  }, py::arg("model"), py::arg("T"), py::arg("seed") = 0,
     "Simulate a builtin design ('var1', 'varma11', 'var_arch'); returns a T x n array.");

  m.def("privatize", &privatize_py, py::arg("values"), py::arg("config") = "{}",
        py::arg("names") = std::vector<std::string>{},
        "Run the release pipeline on a T x n array; config is a JSON string.");

  m.def("rum", [](const Mat& x, const Mat& y, int maxlag) {
    return evaluate(to_series(x, {}), to_series(y, {}), maxlag).rum;
  }, py::arg("x"), py::arg("y"), py::arg("maxlag") = 20);

  m.def("sample_acvf", [](const Mat& x, int maxlag) {
    return sample_acvf(to_series(x, {}), maxlag).lags();
  }, py::arg("x"), py::arg("maxlag"));

  m.def("default_config", [] { return config_to_json(PipelineConfig{}); });
}
