#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "granular/cli.hpp"
#include "granular/dissipation.hpp"
#include "granular/dsmc.hpp"
#include "granular/entropy.hpp"
#include "granular/error.hpp"
#include "granular/haff.hpp"
#include "granular/moments.hpp"
#include "granular/restitution.hpp"

namespace py = pybind11;
using namespace granular;

namespace {

py::dict to_dict(const TimeSeries& s) {
  py::dict d;
  for (const auto& name : s.names()) d[py::str(name)] = py::array_t<double>(s.column(name).size(), s.column(name).data());
  return d;
}

TimeSeries from_columns(const std::vector<double>& t, const std::vector<double>& v, const std::string& name) {
  if (t.size() != v.size()) throw DomainError("t and values must have the same length");
  TimeSeries s({"t", name});
  for (std::size_t i = 0; i < t.size(); ++i) s.append(std::vector<double>{t[i], v[i]});
  return s;
}

std::vector<Vec3> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw DomainError("expected an (N, 3) array");
  std::vector<Vec3> pts(std::size_t(a.shape(0)));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[std::size_t(i)] = {r(i, 0), r(i, 1), r(i, 2)};
  return pts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Granular gas cooling: restitution models, DSMC and Haff's-law diagnostics";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<RestitutionModel>(m, "RestitutionModel")
      .def_static("constant", &RestitutionModel::constant, py::arg("e0"))
      .def_static("power_law", &RestitutionModel::power_law, py::arg("alpha"), py::arg("gamma"),
                  py::arg("e_floor") = std::optional<double>(0.05))
      .def_static("viscoelastic", &RestitutionModel::viscoelastic, py::arg("a"))
      .def("e", &RestitutionModel::e, py::arg("r"))
      .def("theta", &RestitutionModel::theta, py::arg("r"))
      .def("invert_theta", &RestitutionModel::invert_theta, py::arg("y"))
      .def("jacobian", [](const RestitutionModel& mdl, double r) { return mdl.jacobian(r).value; }, py::arg("r"))
      .def("__repr__", &RestitutionModel::describe);

  m.def("psi", &psi, py::arg("model"), py::arg("r"));
  m.def("phi", &phi, py::arg("model"), py::arg("rho"));
  m.def("kappa", &kappa, py::arg("p"));
  m.def("nominal_gamma", &nominal_gamma, py::arg("model"));

  m.def("constant_threshold", [] {
    const ThresholdReport r = constant_threshold();
    return py::dict(py::arg("kappa_32") = r.kappa_32, py::arg("critical_e") = r.critical_e);
  });
  m.def(
      "ell0_threshold",
      [](double gamma, double a_bound, double rho) {
        const ThresholdReport r = ell0_threshold(gamma, a_bound, rho);
        return py::dict(py::arg("c_gamma") = r.c_gamma, py::arg("alpha") = r.alpha, py::arg("k0") = r.k0,
                        py::arg("k") = r.k, py::arg("ell0") = r.ell0, py::arg("capped") = r.ell0_capped);
      },
      py::arg("gamma"), py::arg("A"), py::arg("rho"));

  m.def(
      "meanfield_energy",
      [](const RestitutionModel& model, double e0, const std::vector<double>& times) {
        return to_dict(integrate_meanfield_energy(model, e0, times));
      },
      py::arg("model"), py::arg("E0"), py::arg("times"));

  m.def(
      "simulate",
      [](const RestitutionModel& model, std::size_t particles, double t_end, std::uint64_t seed,
         std::optional<double> stop_energy_ratio, int entropy_k, double theta) {
        SimulationConfig c;
        c.model = model;
        c.particles = particles;
        c.t_end = t_end;
        c.seed = seed;
        c.stop_energy_ratio = stop_energy_ratio;
        c.entropy_k = entropy_k;
        c.init = MaxwellianInit{theta};
        TimeSeries s;
        {
          py::gil_scoped_release release;
          s = run(c);
        }
        return to_dict(s);
      },
      py::arg("model"), py::arg("particles") = 10000, py::arg("t_end") = 10.0, py::arg("seed") = 1,
      py::arg("stop_energy_ratio") = std::optional<double>(), py::arg("entropy_k") = 0,
      py::arg("theta") = 1.0 / 3.0);

  m.def(
      "entropy_knn",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v, int k, std::uint64_t seed) {
        const EntropyEstimate e = entropy_knn(to_points(v), k, seed);
        return py::dict(py::arg("h_signed") = e.h_signed, py::arg("h_abs") = e.h_abs,
                        py::arg("stderr") = e.stderr_signed, py::arg("jittered") = e.jittered);
      },
      py::arg("velocities"), py::arg("k") = 5, py::arg("seed") = 0x5eed);

  m.def("lambert_w", &lambert_w, py::arg("x"));
  m.def(
      "hbar_bound", [](double h, double mk, int n, double k) { return hbar_bound(h, mk, n, k).bound; },
      py::arg("h_signed"), py::arg("M_k"), py::arg("n"), py::arg("k"));
  m.def("moment_lower_bound", &moment_lower_bound, py::arg("h_abs"), py::arg("n"), py::arg("k"), py::arg("eps"));
  m.def(
      "check_inequalities",
      [](std::size_t mixtures, std::size_t balls, std::size_t maxwellians, std::uint64_t seed) {
        const InequalityReport r = check_inequalities(standard_family(mixtures, balls, maxwellians, seed));
        return py::dict(py::arg("count") = r.rows.size(), py::arg("violations") = r.violations,
                        py::arg("worst_slack") = r.worst_slack, py::arg("worst_name") = r.worst_name);
      },
      py::arg("mixtures") = 100, py::arg("balls") = 20, py::arg("maxwellians") = 13, py::arg("seed") = 2024);

  m.def(
      "fit_decay",
      [](const std::vector<double>& t, const std::vector<double>& values) {
        const DecayFit f = fit_decay(from_columns(t, values, "E"));
        return py::dict(py::arg("exponent") = f.exponent, py::arg("prefactor") = f.prefactor,
                        py::arg("t_lo") = f.t_lo, py::arg("t_hi") = f.t_hi, py::arg("residual") = f.residual,
                        py::arg("n_points") = f.n_points);
      },
      py::arg("t"), py::arg("values"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
