#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "torus/flows.hpp"
#include "torus/functionals.hpp"
#include "torus/harness.hpp"
#include "torus/lax.hpp"
#include "torus/measures.hpp"
#include "torus/miura.hpp"
#include "torus/spectral.hpp"

namespace py = pybind11;
using namespace torus;

namespace {

template <class T>
py::array_t<T> to_array(std::span<const T> v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<cplx> coeff_array(const SpectralField& f) { return to_array<cplx>(f.coeffs()); }
py::array_t<double> real_array(const std::vector<double>& v) { return to_array<double>(v); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral toolkit for integrable flows and Gibbs-type measures on the circle";

  py::register_exception<ResolutionError>(m, "ResolutionError");
  py::register_exception<FloquetDegenerate>(m, "FloquetDegenerate");
  py::register_exception<TailNotConverged>(m, "TailNotConverged");
  py::register_exception<FlowUnstable>(m, "FlowUnstable");
  py::register_exception<MiuraInverseFailure>(m, "MiuraInverseFailure");
  py::register_exception<QuadratureFailure>(m, "QuadratureFailure");

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init<int, int>(), py::arg("n_modes") = 0, py::arg("grid_factor") = 2)
      .def_static(
          "from_coeffs",
          [](py::array_t<cplx, py::array::c_style | py::array::forcecast> c, int grid_factor) {
            return SpectralField::from_coeffs(std::vector<cplx>(c.data(), c.data() + c.size()), grid_factor);
          },
          py::arg("coeffs"), py::arg("grid_factor") = 2, "coefficients c_{-n..n}; symmetrized to a real field")
      .def_static(
          "from_samples",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> x, int n_modes) {
            std::span<const double> s(x.data(), static_cast<size_t>(x.size()));
            return n_modes < 0 ? analyze(s) : analyze(s, n_modes);
          },
          py::arg("samples"), py::arg("n_modes") = -1)
      .def_property_readonly("n_modes", &SpectralField::n_modes)
      .def_property_readonly("coeffs", &coeff_array)
      .def("coeff", &SpectralField::coeff)
      .def("set", &SpectralField::set)
      .def("mean", &SpectralField::mean)
      .def("samples", [](const SpectralField& f, int grid) { return real_array(grid > 0 ? synthesize(f, grid) : synthesize(f)); },
           py::arg("grid") = 0)
      .def("__call__", [](const SpectralField& f, double x) { return evaluate(f, x); })
      .def("__add__", [](const SpectralField& a, const SpectralField& b) { return a + b; })
      .def("__sub__", [](const SpectralField& a, const SpectralField& b) { return a - b; })
      .def("__mul__", [](const SpectralField& a, double s) { return s * a; })
      .def("__rmul__", [](const SpectralField& a, double s) { return s * a; })
      .def("__repr__", [](const SpectralField& f) { return "SpectralField(n_modes=" + std::to_string(f.n_modes()) + ")"; });

  m.def("inner", &inner);
  m.def("l2_norm", &l2_norm);
  m.def("sobolev_norm", &sobolev_norm, py::arg("f"), py::arg("s"), py::arg("kappa") = py::none());
  m.def("project", [](const SpectralField& f, int N) { return project(f, N); });
  m.def("resize", &resize);
  m.def("to_json", &to_json, py::arg("f"), py::arg("meta") = 0.0);
  m.def("from_json", [](const std::string& t) { return from_json(t); });

  m.def(
      "diagonal_greens",
      [](const SpectralField& q, double kappa) {
        const auto d = diagonal_greens(q, kappa);
        py::dict out;
        out["gamma"] = d.gamma;
        out["g_plus"] = d.g_plus;
        out["g_minus"] = d.g_minus;
        out["rho_plus"] = d.monodromy.rho_plus;
        return out;
      },
      py::arg("q"), py::arg("kappa"));
  m.def("green_at", [](const SpectralField& q, double kappa, double x, double y) {
    const auto g = green_at(q, kappa, x, y);
    return std::vector<double>(g.entries.begin(), g.entries.end());
  });

  m.def("mass", &mass);
  m.def("hamiltonian_mkdv", [](const SpectralField& q, bool focusing) {
    return hamiltonian_mkdv(q, focusing ? Sign::focusing : Sign::defocusing);
  }, py::arg("q"), py::arg("focusing") = false);
  m.def("a_full", [](const SpectralField& q, double kappa) { return a_full(q, kappa); });
  m.def("h_kappa", [](const SpectralField& q, double kappa) { return h_kappa(q, kappa); });
  m.def("e_s", [](const SpectralField& q, double s) { return e_s_total(q, s, KappaQuadrature{}); },
        py::arg("q"), py::arg("s") = 0.75);
  m.def("e_functional", [](const SpectralField& q, double s) { return e_functional(q, KappaQuadrature{}, s).total(); },
        py::arg("q"), py::arg("s") = 0.75);

  m.def(
      "flow_to",
      [](const SpectralField& q0, const std::string& kind, double t, double dt, double kappa, int N) {
        FlowSpec s;
        s.kind = parse_flow_kind(kind);
        s.t_end = t;
        s.dt = dt;
        s.kappa = kappa;
        s.N = N;
        s.log_functionals = false;
        py::gil_scoped_release nogil;
        return flow_to(q0, s);
      },
      py::arg("q0"), py::arg("kind") = "mkdv", py::arg("t") = 0.01, py::arg("dt") = 1e-5, py::arg("kappa") = 2.0,
      py::arg("N") = 0);
  m.def("flow_commutator", &flow_commutator, py::arg("q0"), py::arg("kappa"), py::arg("t"), py::arg("tau"),
        py::arg("dt"));

  m.def("miura_forward", [](const SpectralField& q) { return miura_forward(q); });
  m.def("miura_inverse", [](const SpectralField& w) { return miura_inverse(w).q; });

  m.def("ms_squared", [](double s, double xi) { return ms_squared(s, xi); });
  m.def("c_s_constant", [](double s) { return c_s_constant(s); });
  m.def("multiplier", [](double s, int k_max) { return real_array(multiplier_table(s, k_max).m2); });
  m.def(
      "sample_mu_s",
      [](double s, int n_modes, std::uint64_t seed, std::uint64_t draw, bool mean_zero) {
        MeasureSpec spec;
        spec.s = s;
        spec.n_modes = n_modes;
        spec.mean_zero = mean_zero;
        MultiplierTable t;
        t.s = s;
        t.m2 = ms2_cached(s, n_modes);
        return sample_mu_s(spec, t, seed, draw);
      },
      py::arg("s") = 0.75, py::arg("n_modes") = 32, py::arg("seed") = 0, py::arg("draw") = 0,
      py::arg("mean_zero") = false);

  m.def(
      "invariance_test",
      [](const std::string& flow, double t, double kappa, int n_modes, double R, int M, std::uint64_t seed) {
        MeasureSpec spec;
        spec.n_modes = n_modes;
        spec.R = R;
        InvarianceSpec inv;
        inv.flow = parse_invariance_flow(flow);
        inv.t = t;
        inv.kappa = kappa;
        InvarianceReport r;
        {
          py::gil_scoped_release nogil;
          r = invariance_test(spec, inv, default_observables(), M, seed, 200);
        }
        py::dict out;
        py::list rows;
        for (auto& o : r.observables)
          rows.append(py::dict(py::arg("name") = o.name, py::arg("before") = o.before_mean,
                               py::arg("after") = o.after_mean, py::arg("z") = o.z));
        out["observables"] = rows;
        out["ess"] = r.ess;
        out["max_abs_z"] = r.max_abs_z();
        out["failures"] = r.failures;
        out["inconclusive"] = r.inconclusive;
        return out;
      },
      py::arg("flow") = "h_kappa_trunc", py::arg("t") = 0.1, py::arg("kappa") = 2.0, py::arg("n_modes") = 32,
      py::arg("R") = 4.0, py::arg("M") = 512, py::arg("seed") = 1);
}
