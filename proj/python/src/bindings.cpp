#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "backpar/commands.hpp"
#include "backpar/error.hpp"
#include "backpar/experiments.hpp"
#include "backpar/validation.hpp"

namespace py = pybind11;
using namespace backpar;

namespace {

py::dict row_dict(const MISERow& r) {
  py::dict d;
  d["method"] = r.method;
  d["delta"] = r.delta;
  d["t"] = r.t;
  d["trials"] = r.trials;
  d["mise_mean"] = r.mise_mean;
  d["mise_stderr"] = r.mise_stderr;
  d["envelope"] = r.envelope;
  d["slope"] = r.slope;
  d["slope_ci"] = r.slope_ci;
  return d;
}

}  // namespace

PYBIND11_MODULE(_backpar, m) {
  m.doc() = "Backward parabolic reconstruction from noisy final-time data";

  // translators run newest first, so the base class goes first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("eigenvalues", [](int dim, std::size_t modes) {
    DomainSpec d;
    d.dim = dim;
    const auto b = build_basis_fitting(d, modes);
    return std::vector<double>(b->eigenvalues().begin(), b->eigenvalues().end());
  }, py::arg("dim"), py::arg("modes"), "First eigenvalues of the Dirichlet Laplacian on (0, pi)^dim.");

  m.def("q_beta", &q_beta_multiplier, py::arg("lam"), py::arg("beta"), py::arg("M"), py::arg("T"));
  m.def("p_beta", &p_beta_multiplier, py::arg("lam"), py::arg("beta"), py::arg("M"), py::arg("T"));

  m.def("source", [](const std::string& name, double u) { return source_by_name(name).eval({1.0, 1.0}, 0.0, u); },
        py::arg("name"), py::arg("u"), "Evaluate a registered source at u.");

  py::class_<TruncationParams>(m, "TruncationParams")
      .def_readonly("N", &TruncationParams::N)
      .def_readonly("alpha", &TruncationParams::alpha)
      .def("predicted_slope", &TruncationParams::predicted_slope);
  m.def("truncation_params", &choose_params_truncation, py::arg("delta"), py::arg("k"), py::arg("T"), py::arg("gamma"),
        py::arg("d"), py::arg("a"), py::arg("b"));

  py::class_<QRParams>(m, "QRParams")
      .def_readonly("N", &QRParams::N)
      .def_readonly("beta", &QRParams::beta)
      .def_readonly("admissibility_bound", &QRParams::admissibility_bound)
      .def("predicted_slope", &QRParams::predicted_slope);
  m.def("qr_params", &choose_params_qr, py::arg("delta"), py::arg("c"), py::arg("m"), py::arg("gamma"), py::arg("d"),
        py::arg("k"), py::arg("T"), py::arg("M"), py::arg("lambda1") = 1.0);

  m.def("fit_rate", [](const std::vector<std::pair<double, double>>& pts) {
    const auto f = fit_rate(pts);
    return py::make_tuple(f.slope, f.intercept, f.r2, f.slope_ci);
  }, py::arg("points"), "Least-squares slope, intercept, R^2 and 95% slope half-width of ln mise on ln delta.");

  m.def("case_names", &case_names);
  m.def("method_names", &method_names);

  m.def("run_mise", [](const std::string& config_text, std::size_t trials, std::uint64_t seed, unsigned threads) {
    const auto cfg = parse_config_text(config_text);
    MISEReport r;
    {
      py::gil_scoped_release release;
      const auto mc = build_case(cfg);
      r = run_mise(mc, cfg.method_cfg, cfg.deltas, requested_times(cfg, mc.T), trials, seed, threads);
    }
    py::list rows;
    for (const auto& row : r.rows) rows.append(row_dict(row));
    return rows;
  }, py::arg("config"), py::arg("trials"), py::arg("seed") = 0, py::arg("threads") = 0,
     "MISE sweep for an INI config given as text; returns one dict per (delta, t).");

  m.def("report_csv", [](const std::string& config_text, std::size_t trials, std::uint64_t seed, unsigned threads) {
    const auto cfg = parse_config_text(config_text);
    py::gil_scoped_release release;
    const auto mc = build_case(cfg);
    return report_csv(run_mise(mc, cfg.method_cfg, cfg.deltas, requested_times(cfg, mc.T), trials, seed, threads));
  }, py::arg("config"), py::arg("trials"), py::arg("seed") = 0, py::arg("threads") = 0);

  m.def("validate", []() {
    py::list out;
    for (const auto& s : run_validation_suites()) out.append(py::make_tuple(s.name, s.passed, s.detail));
    return out;
  });
}
