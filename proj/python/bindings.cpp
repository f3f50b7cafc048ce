//! Python module _dampkde: thin wrappers over the C++ library. Structured
//! results come back as dicts and NumPy arrays.

#include "dampkde/density.hpp"
#include "dampkde/error.hpp"
#include "dampkde/experiments.hpp"
#include "dampkde/inverse.hpp"
#include "dampkde/kernel.hpp"
#include "dampkde/lower_bound.hpp"
#include "dampkde/path_io.hpp"
#include "dampkde/rng.hpp"
#include "dampkde/simulator.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace dampkde;

namespace {

py::object
to_py(const nlohmann::json& j)
{
  return py::module_::import("json").attr("loads")(j.dump());
}

py::array_t<double>
to_array(const std::vector<double>& v)
{
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double>
to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
  return { a.data(), a.data() + a.size() };
}

py::dict
path_to_dict(const Path& p)
{
  py::dict d;
  d["t0"] = p.t0;
  d["dt"] = p.dt;
  d["x"] = to_array(p.x);
  d["y"] = to_array(p.y);
  d["db"] = to_array(p.db);
  d["seed"] = p.seed;
  d["model"] = p.model_name;
  d["warnings"] = p.warnings;
  return d;
}

Path
path_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                 py::array_t<double, py::array::c_style | py::array::forcecast> y,
                 double dt)
{
  Path p;
  p.dt = dt;
  p.x = to_vector(x);
  p.y = to_vector(y);
  if (p.x.size() != p.y.size())
    throw Error(ErrorCode::bookkeeping, "x and y differ in length");
  return p;
}

py::dict
report_to_dict(const ExperimentReport& r)
{
  py::dict d;
  d["stem"] = report_stem(r);
  d["columns"] = r.columns;
  py::array_t<double> rows({ static_cast<py::ssize_t>(r.rows.size()), static_cast<py::ssize_t>(r.columns.size()) });
  auto m = rows.mutable_unchecked<2>();
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.columns.size(); ++j)
      m(i, j) = r.rows[i][j];
  d["rows"] = rows;
  d["metadata"] = to_py(report_json(r));
  d["warnings"] = r.warnings;
  return d;
}

PriorSpec
make_spec(const std::string& variant, double eta, double sigma, double x0, double y0, double h1, double h2, double M)
{
  PriorSpec s;
  s.variant = prior_variant_from_string(variant);
  s.eta = eta;
  s.sigma = sigma;
  s.x0 = x0;
  s.y0 = y0;
  s.h1 = h1;
  s.h2 = h2;
  s.M = M;
  return s;
}

CalibrationOptions
make_options(double eps, double amplitude_scale, double eta, double sigma, double x0, std::optional<double> y0)
{
  CalibrationOptions o;
  o.eps = eps;
  o.amplitude_scale = amplitude_scale;
  o.eta = eta;
  o.sigma = sigma;
  o.x0 = x0;
  o.y0 = y0;
  return o;
}

} // namespace

PYBIND11_MODULE(_dampkde, m)
{
  m.doc() = "Kernel density estimation for stochastic damping Hamiltonian systems";
  m.attr("__version__") = DAMPKDE_VERSION;

  static PyObject* error_type = PyErr_NewException("dampkde._dampkde.DampkdeError", PyExc_RuntimeError, nullptr);
  m.attr("DampkdeError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const Error& e) {
      py::gil_scoped_acquire gil;
      py::tuple args = py::make_tuple(std::string(e.what()), std::string(to_string(e.code())), e.context());
      PyErr_SetObject(error_type, args.ptr());
    }
  });

  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("index"));
  m.def("model_catalog_names", &model_catalog_names);

  m.def(
    "simulate",
    [](const std::string& model, double T, double dt, double burn_in, std::uint64_t seed,
       std::array<double, 2> init, bool stationary_start, const ModelParams& params) {
      SimulationConfig c;
      c.model = model_from_catalog(model, params);
      c.T = T;
      c.dt = dt;
      c.burn_in = burn_in;
      c.seed = seed;
      if (stationary_start) {
        const double eta = params.count("eta") ? params.at("eta") : 0.5;
        auto d = catalog_stationary_density(model, eta);
        if (!d || !d->sampler)
          throw Error(ErrorCode::config, "model has no stationary sampler", { { "keys", "stationary_start" } });
        c.init = StationaryStart{ *d };
      } else {
        c.init = InitialPoint{ init[0], init[1] };
      }
      Path p;
      {
        py::gil_scoped_release release;
        p = simulate(c);
      }
      return path_to_dict(p);
    },
    py::arg("model") = "paper-sim", py::arg("T") = 200.0, py::arg("dt") = 1e-3, py::arg("burn_in") = 50.0,
    py::arg("seed") = 1, py::arg("init") = std::array<double, 2>{ 0.0, 0.0 },
    py::arg("stationary_start") = false, py::arg("params") = ModelParams{},
    "Euler-Maruyama path of a catalog model; returns a dict with arrays x, y, db.");

  m.def(
    "load_path", [](const std::string& file) { return path_to_dict(load_path(file)); }, py::arg("file"));

  m.def(
    "estimate",
    [](py::array_t<double, py::array::c_style | py::array::forcecast> x,
       py::array_t<double, py::array::c_style | py::array::forcecast> y, double dt,
       const std::vector<std::array<double, 2>>& points, double h1, double h2, int L) {
      const Path p = path_from_arrays(x, y, dt);
      const Bandwidths bw{ h1, h2 };
      bw.validate();
      std::vector<double> out;
      for (const auto& e : estimate_grid(p, points, bw, build_kernel(L)))
        out.push_back(e.value);
      return to_array(out);
    },
    py::arg("x"), py::arg("y"), py::arg("dt"), py::arg("points"), py::arg("h1"), py::arg("h2"),
    py::arg("L") = 1, "Kernel estimates at each point from a path sampled every dt.");

  m.def(
    "kernel",
    [](int L, py::array_t<double, py::array::c_style | py::array::forcecast> u) {
      const Kernel k = build_kernel(L);
      std::vector<double> out;
      for (double v : to_vector(u))
        out.push_back(k(v));
      return to_array(out);
    },
    py::arg("L"), py::arg("u"), "Order-L kernel evaluated at u.");

  m.def(
    "select_bandwidths",
    [](double k1, double k2, bool y0_is_zero, double T, std::optional<double> c_fast) {
      const auto b = select_bandwidths(k1, k2, y0_is_zero, T, c_fast);
      py::dict d;
      d["h1"] = b.bw.h1;
      d["h2"] = b.bw.h2;
      d["regime"] = b.regime;
      d["slow_exponent"] = b.slow_exponent;
      d["c_fast"] = b.c_fast;
      d["c_fast_lower_bound"] = b.c_fast_lower_bound;
      d["mse_exponent"] = b.mse_exponent;
      d["warnings"] = b.warnings;
      return d;
    },
    py::arg("k1"), py::arg("k2"), py::arg("y0_is_zero"), py::arg("T"), py::arg("c_fast") = py::none());

  m.def(
    "inverse_beta",
    [](const std::string& density, double eta, double sigma,
       py::array_t<double, py::array::c_style | py::array::forcecast> xs,
       py::array_t<double, py::array::c_style | py::array::forcecast> ys) {
      DensityModel g;
      Potential V;
      if (density == "gaussian-eta") {
        auto [pi0, model] = gaussian_model(eta, sigma);
        g = pi0;
        V = model.potential;
      } else if (density == "paper-sim") {
        g = *catalog_stationary_density("paper-sim");
        V = Potential::harmonic(1.0);
        sigma = 0.5;
      } else {
        throw Error(ErrorCode::config, "unknown density " + density, { { "keys", "density" } });
      }
      const auto x = to_vector(xs), y = to_vector(ys);
      py::array_t<double> out({ static_cast<py::ssize_t>(x.size()), static_cast<py::ssize_t>(y.size()) });
      auto r = out.mutable_unchecked<2>();
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
          r(i, j) = beta_from_density(g, V, sigma, x[i], y[j]);
      return out;
    },
    py::arg("density") = "gaussian-eta", py::arg("eta") = 0.5, py::arg("sigma") = 1.0, py::arg("xs"),
    py::arg("ys"), "Damping field that makes the density stationary, on the grid xs by ys.");

  m.def(
    "variance_sweep",
    [](const std::string& model, const ModelParams& params, std::array<double, 2> point, double T,
       std::size_t n_rep, std::uint64_t seed_base, const std::vector<double>& h1_grid,
       const std::vector<double>& h2_grid, int L, double dt, double burn_in, unsigned threads, bool dt_audit) {
      VarianceSweepConfig c;
      c.model = model;
      c.params = params;
      c.x0 = point[0];
      c.y0 = point[1];
      c.T = T;
      c.n_rep = n_rep;
      c.seed_base = seed_base;
      c.h1_grid = h1_grid;
      c.h2_grid = h2_grid;
      c.L = L;
      c.dt = dt;
      c.burn_in = burn_in;
      c.threads = threads;
      c.dt_audit = dt_audit;
      ExperimentReport r;
      {
        py::gil_scoped_release release;
        r = variance_sweep(c).report();
      }
      return report_to_dict(r);
    },
    py::arg("model") = "paper-sim", py::arg("params") = ModelParams{},
    py::arg("point") = std::array<double, 2>{ 0.0, 1.5 }, py::arg("T") = 200.0, py::arg("n_rep") = 500,
    py::arg("seed_base") = 1, py::arg("h1_grid"), py::arg("h2_grid"), py::arg("L") = 1, py::arg("dt") = 1e-3,
    py::arg("burn_in") = 50.0, py::arg("threads") = 0, py::arg("dt_audit") = false);

  m.def(
    "rate_sweep",
    [](const std::string& model, std::array<double, 2> point, double k1, double k2,
       const std::vector<double>& T_grid, std::size_t n_rep, std::uint64_t seed_base, int L,
       std::optional<double> c_fast, double dt, unsigned threads) {
      RateSweepConfig c;
      c.model = model;
      c.x0 = point[0];
      c.y0 = point[1];
      c.k1 = k1;
      c.k2 = k2;
      c.T_grid = T_grid;
      c.n_rep = n_rep;
      c.seed_base = seed_base;
      c.L = L;
      c.c_fast = c_fast;
      c.dt = dt;
      c.threads = threads;
      ExperimentReport r;
      {
        py::gil_scoped_release release;
        r = rate_sweep(c).report();
      }
      return report_to_dict(r);
    },
    py::arg("model") = "paper-sim", py::arg("point") = std::array<double, 2>{ 0.0, 1.5 }, py::arg("k1") = 1.0,
    py::arg("k2") = 1.0, py::arg("T_grid") = std::vector<double>{ 50, 100, 200, 400 }, py::arg("n_rep") = 300,
    py::arg("seed_base") = 1, py::arg("L") = 1, py::arg("c_fast") = py::none(), py::arg("dt") = 1e-3,
    py::arg("threads") = 0);

  m.def(
    "covariance_lag",
    [](const std::string& model, std::array<double, 2> point, double h1, double h2, double T, std::size_t n_rep,
       std::uint64_t seed_base, const std::vector<double>& lags, int L, double dt, unsigned threads) {
      CovarianceLagConfig c;
      c.model = model;
      c.x0 = point[0];
      c.y0 = point[1];
      c.bw = { h1, h2 };
      c.T = T;
      c.n_rep = n_rep;
      c.seed_base = seed_base;
      if (!lags.empty())
        c.lags = lags;
      c.L = L;
      c.dt = dt;
      c.threads = threads;
      ExperimentReport r;
      {
        py::gil_scoped_release release;
        r = covariance_lag(c).report();
      }
      return report_to_dict(r);
    },
    py::arg("model") = "paper-sim", py::arg("point") = std::array<double, 2>{ 0.0, 1.5 }, py::arg("h1") = 0.3,
    py::arg("h2") = 0.3, py::arg("T") = 200.0, py::arg("n_rep") = 100, py::arg("seed_base") = 1,
    py::arg("lags") = std::vector<double>{}, py::arg("L") = 1, py::arg("dt") = 1e-3, py::arg("threads") = 0);

  py::class_<Prior>(m, "Prior")
    .def(py::init([](const std::string& variant, double h1, double h2, double M, double eta, double sigma,
                     double x0, std::optional<double> y0) {
           return build_prior(make_spec(variant, eta, sigma, x0,
                                        y0.value_or(variant == "y0_zero" ? 0.0 : 1.5), h1, h2, M));
         }),
         py::arg("variant") = "y0_nonzero", py::arg("h1"), py::arg("h2"), py::arg("M"), py::arg("eta") = 0.25,
         py::arg("sigma") = 1.0, py::arg("x0") = 0.0, py::arg("y0") = py::none())
    .def_property_readonly("spec", [](const Prior& p) { return to_py(to_json(p.spec())); })
    .def("delta", &Prior::delta, py::arg("x"), py::arg("y"))
    .def("pi0", [](const Prior& p, double x, double y) { return p.pi0().value(x, y); })
    .def("pi_tilde", [](const Prior& p, double x, double y) { return p.pi_tilde().value(x, y); })
    .def("support", [](const Prior& p) {
      const Box b = p.support();
      return std::array<double, 4>{ b.x_lo, b.x_hi, b.y_lo, b.y_hi };
    })
    .def("checks", [](const Prior& p, double R) { return to_py(to_json(check_prior(p, R))); }, py::arg("R") = 10.0)
    .def(
      "girsanov",
      [](const Prior& p, double T, std::size_t n_rep, std::uint64_t seed_base, double dt, unsigned threads,
         double lambda0) {
        GirsanovEnsemble e;
        {
          py::gil_scoped_release release;
          e = girsanov_ensemble(p, T, n_rep, seed_base, dt, threads, lambda0);
        }
        py::dict d = to_py(to_json(e));
        std::vector<double> lr, I, M;
        for (const auto& t : e.terms) {
          lr.push_back(t.log_ratio);
          I.push_back(t.I_T);
          M.push_back(t.M_mart);
        }
        d["log_ratio"] = to_array(lr);
        d["I_T"] = to_array(I);
        d["M_mart"] = to_array(M);
        return d;
      },
      py::arg("T"), py::arg("n_rep") = 500, py::arg("seed_base") = 1, py::arg("dt") = 1e-3, py::arg("threads") = 0,
      py::arg("lambda0") = 2.0);

  m.def(
    "calibrate_prior",
    [](double k1, double k2, double T, const std::string& variant, double eps, double amplitude_scale, double eta,
       double sigma, double x0, std::optional<double> y0) {
      const auto c = calibrate_prior(k1, k2, T, prior_variant_from_string(variant),
                                     make_options(eps, amplitude_scale, eta, sigma, x0, y0));
      return py::make_tuple(build_prior(c.spec), to_py(to_json(c)));
    },
    py::arg("k1"), py::arg("k2"), py::arg("T"), py::arg("variant") = "y0_nonzero", py::arg("eps") = 0.01,
    py::arg("amplitude_scale") = 20.0, py::arg("eta") = 1.0, py::arg("sigma") = 1.0, py::arg("x0") = 0.0,
    py::arg("y0") = py::none(), "Theory-calibrated prior; returns (Prior, calibration dict).");

  m.def(
    "verify_perturbation_bounds",
    [](const std::string& variant, double M, double eta, double sigma, int outside_points) {
      PriorSpec base = make_spec(variant, eta, sigma, 0.0, variant == "y0_zero" ? 0.0 : 1.5, 0, 0, M);
      return to_py(to_json(verify_perturbation_bounds(base, default_ladder(base.variant, M), outside_points)));
    },
    py::arg("variant") = "y0_nonzero", py::arg("M") = 100.0, py::arg("eta") = 0.25, py::arg("sigma") = 1.0,
    py::arg("outside_points") = 200);
}
