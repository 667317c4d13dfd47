#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mfbel/config.hpp"
#include "mfbel/estimators.hpp"
#include "mfbel/experiment.hpp"
#include "mfbel/meanfield.hpp"
#include "mfbel/models.hpp"
#include "mfbel/validate.hpp"

namespace py = pybind11;
using namespace mfbel;

namespace {

Parameters to_parameters(const py::dict& d) {
  Parameters p;
  for (const auto& [key, value] : d) {
    const auto name = py::cast<std::string>(key);
    if (py::isinstance<py::str>(value)) {
      p.set_option(name, py::cast<std::string>(value));
    } else {
      p.set(name, py::cast<double>(value));
    }
  }
  return p;
}

py::dict from_parameters(const Parameters& p) {
  py::dict d;
  for (const auto& [k, v] : p.values()) d[py::str(k)] = v;
  for (const auto& [k, v] : p.options()) d[py::str(k)] = v;
  return d;
}

py::array_t<double> array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::dict curves_dict(const MeanFieldCurves& c, const TimeGrid& grid) {
  std::vector<double> t(grid.nodes());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = grid.time(i);
  py::dict d;
  d["t"] = array(t);
  d["rho"] = array(c.rho);
  d["pi"] = array(c.pi);
  d["drho_dx"] = array(c.drho_dx);
  d["dpi_dx"] = array(c.dpi_dx);
  return d;
}

py::dict estimate_dict(const DeltaResult& r) {
  const DeltaEstimate& e = r.estimate;
  py::dict d;
  d["method"] = to_string(e.method);
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["variance"] = e.variance;
  d["n_paths"] = e.n_paths;
  d["n_steps"] = e.n_steps;
  d["h"] = e.h ? py::cast(*e.h) : py::none();
  d["seed"] = e.seed;
  py::list trace;
  for (const auto& p : r.trace.checkpoints) trace.append(py::make_tuple(p.n, p.estimate, p.std_error));
  d["trace"] = trace;
  return d;
}

FdScheme parse_fd_scheme(const std::string& s) {
  if (s == "central") return FdScheme::central;
  if (s == "forward") return FdScheme::forward;
  throw py::value_error("fd_scheme must be 'central' or 'forward'");
}

}  // namespace

PYBIND11_MODULE(_mfbel, m) {
  m.doc() = "Delta estimators for mean-field SDEs";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::enum_<Scheme>(m, "Scheme").value("euler", Scheme::euler).value("log_euler", Scheme::log_euler);
  py::enum_<CurveResolver>(m, "CurveResolver")
      .value("analytic", CurveResolver::analytic)
      .value("particle", CurveResolver::particle);

  py::class_<ModelSpec>(m, "Model")
      .def_readonly("id", &ModelSpec::id)
      .def_property_readonly("params", [](const ModelSpec& s) { return from_parameters(s.parameters); })
      .def_property_readonly("weight",
                             [](const ModelSpec& s) -> py::object {
                               if (!s.closed_form_weight) return py::none();
                               return py::str(to_string(*s.closed_form_weight));
                             })
      .def("__repr__", [](const ModelSpec& s) { return "<mfbel.Model " + s.id + ">"; });

  m.def("build_model", [](const std::string& id, const py::dict& params) { return build_model(id, to_parameters(params)); },
        py::arg("id"), py::arg("params") = py::dict(), "Catalog model: bs_dividend, mean_drift, mean_vol, classical_gbm.");
  m.attr("model_ids") = std::vector<std::string>(std::begin(kModelIds), std::end(kModelIds));

  m.def("parameter_set", [](char which) {
    const ParameterSet s = parameter_set(which);
    py::dict d;
    d["params"] = from_parameters(s.params);
    d["x0"] = s.x0;
    d["strike"] = s.strike;
    d["horizon"] = s.horizon;
    return d;
  });

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init([](double x0, double horizon, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                       unsigned threads, Scheme scheme, CurveResolver resolver, bool generic_weight, bool crn) {
             EstimatorConfig c;
             c.x0 = x0;
             c.horizon = horizon;
             c.n_steps = n_steps;
             c.n_paths = n_paths;
             c.seed = seed;
             c.threads = threads;
             c.scheme = scheme;
             c.resolver = resolver;
             c.generic_weight = generic_weight;
             c.common_random_numbers = crn;
             return c;
           }),
           py::kw_only(), py::arg("x0") = 1.0, py::arg("horizon") = 1.0, py::arg("n_steps") = 512,
           py::arg("n_paths") = 100000, py::arg("seed") = 1, py::arg("threads") = 1, py::arg("scheme") = Scheme::euler,
           py::arg("resolver") = CurveResolver::analytic, py::arg("generic_weight") = false, py::arg("crn") = true)
      .def_readwrite("x0", &EstimatorConfig::x0)
      .def_readwrite("horizon", &EstimatorConfig::horizon)
      .def_readwrite("n_steps", &EstimatorConfig::n_steps)
      .def_readwrite("n_paths", &EstimatorConfig::n_paths)
      .def_readwrite("seed", &EstimatorConfig::seed)
      .def_readwrite("threads", &EstimatorConfig::threads)
      .def_readwrite("scheme", &EstimatorConfig::scheme)
      .def_readwrite("resolver", &EstimatorConfig::resolver)
      .def_readwrite("generic_weight", &EstimatorConfig::generic_weight)
      .def_readwrite("crn", &EstimatorConfig::common_random_numbers);

  m.def(
      "estimate_delta",
      [](const ModelSpec& model, const std::string& payoff, double strike, const EstimatorConfig& config,
         const std::string& method, double h, const std::string& fd_scheme) {
        const Payoff p{parse_payoff_kind(payoff), strike};
        py::gil_scoped_release release;
        DeltaResult r;
        if (method == "malliavin") {
          r = estimate_delta_malliavin(model, p, config);
        } else if (method == "fd") {
          r = estimate_delta_fd(model, p, config, h, parse_fd_scheme(fd_scheme));
        } else if (method == "pathwise") {
          r = estimate_delta_pathwise(model, p, config);
        } else {
          throw py::value_error("method must be 'malliavin', 'fd' or 'pathwise'");
        }
        py::gil_scoped_acquire acquire;
        return estimate_dict(r);
      },
      py::arg("model"), py::arg("payoff"), py::arg("strike"), py::arg("config"), py::arg("method") = "malliavin",
      py::arg("h") = 0.01, py::arg("fd_scheme") = "central");

  m.def(
      "compare_methods",
      [](const ModelSpec& model, const std::string& payoff, double strike, const EstimatorConfig& config,
         const std::vector<double>& h_list, const std::string& fd_scheme) {
        CompareOptions o;
        o.fd_scheme = parse_fd_scheme(fd_scheme);
        std::vector<MethodRow> rows;
        {
          py::gil_scoped_release release;
          rows = compare_methods(model, {parse_payoff_kind(payoff), strike}, config, h_list, o);
        }
        py::list out;
        for (const auto& row : rows) {
          py::dict d = row.result ? estimate_dict(*row.result) : py::dict();
          d["label"] = row.label;
          d["error"] = row.error;
          out.append(d);
        }
        return out;
      },
      py::arg("model"), py::arg("payoff"), py::arg("strike"), py::arg("config"),
      py::arg("h_list") = std::vector<double>{0.1, 0.01}, py::arg("fd_scheme") = "central");

  m.def(
      "malliavin_weights",
      [](const ModelSpec& model, const EstimatorConfig& config) { return array(malliavin_weights(model, config)); },
      py::arg("model"), py::arg("config"), "Per-path weights on the shared noise streams.");

  m.def(
      "closed_form",
      [](const ModelSpec& model, const std::string& payoff, double strike, double x, double horizon) -> py::object {
        const auto r = closed_form_price_and_delta(model, {parse_payoff_kind(payoff), strike}, x, horizon);
        if (!r) return py::none();
        return py::make_tuple(r->price, r->delta);
      },
      py::arg("model"), py::arg("payoff"), py::arg("strike"), py::arg("x"), py::arg("horizon") = 1.0,
      "(price, delta) or None.");

  m.def(
      "analytic_curves",
      [](const ModelSpec& model, double x, double horizon, std::size_t n_steps) {
        if (!model.analytic_curves) throw py::value_error("model has no analytic curves");
        const TimeGrid grid(horizon, n_steps);
        return curves_dict(model.analytic_curves(x, grid), grid);
      },
      py::arg("model"), py::arg("x"), py::arg("horizon") = 1.0, py::arg("n_steps") = 512);

  m.def(
      "particle_curves",
      [](const ModelSpec& model, double x, double horizon, std::size_t n_steps, std::size_t n_particles, double tol,
         std::size_t max_iters, std::uint64_t seed, unsigned threads) {
        const TimeGrid grid(horizon, n_steps);
        ParticleSettings s;
        s.n_particles = n_particles;
        s.tol = tol;
        s.max_iters = max_iters;
        s.seed = seed;
        s.threads = threads;
        FixedPointDiagnostics diag;
        MeanFieldCurves curves;
        {
          py::gil_scoped_release release;
          curves = particle_fixed_point(model, x, grid, s, &diag);
        }
        py::dict d = curves_dict(curves, grid);
        d["iterations"] = diag.iterations;
        d["final_distance"] = diag.final_distance;
        return d;
      },
      py::arg("model"), py::arg("x"), py::arg("horizon") = 1.0, py::arg("n_steps") = 512,
      py::arg("n_particles") = 100000, py::arg("tol") = 1e-6, py::arg("max_iters") = 50, py::arg("seed") = 0x5eed,
      py::arg("threads") = 1);

  m.def(
      "run_config",
      [](const std::string& path, py::object out_dir, py::object threads) {
        RunConfig c = load_config(path).config;
        if (!out_dir.is_none()) c.output = py::cast<std::string>(py::str(out_dir));
        if (!threads.is_none()) c.threads = py::cast<unsigned>(threads);
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cmd_run(c, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("path"), py::arg("out_dir") = py::none(), py::arg("threads") = py::none(),
      "Same as `mfbel run --config path`; returns (exit_code, stdout, stderr).");

  m.def(
      "validate",
      [](const std::string& level, std::uint64_t seed, unsigned threads, const std::string& inject_fault) {
        ValidationOptions o;
        o.level = parse_validation_level(level);
        o.seed = seed;
        o.threads = threads;
        o.inject_fault = inject_fault;
        ValidationReport report;
        {
          py::gil_scoped_release release;
          report = run_validation(o);
        }
        py::list out;
        for (const auto& c : report.checks) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("level") = "fast", py::arg("seed") = 1, py::arg("threads") = 1, py::arg("inject_fault") = "",
      "List of (name, passed, detail).");
}
