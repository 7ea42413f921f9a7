#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "mflab/bubbles.hpp"
#include "mflab/functional.hpp"
#include "mflab/mass_algebra.hpp"
#include "mflab/measures.hpp"
#include "mflab/radial_shooting.hpp"
#include "mflab/solver.hpp"

namespace py = pybind11;
using namespace mflab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TorusField to_field(const Array& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ValidationError("field must be a square 2-d array");
    const TorusGrid g(static_cast<int>(a.shape(0)));
    return TorusField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const TorusField& f) {
    Array out({f.n(), f.n()});
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Weights weights(TorusGrid g, const std::optional<Array>& h1, const std::optional<Array>& h2) {
    return Weights(h1 ? to_field(*h1) : TorusField::constant(g, 1.0), h2 ? to_field(*h2) : TorusField::constant(g, 1.0));
}

py::dict type_dict(const BlowupType& t) {
    py::dict d;
    d["kind"] = to_string(t.kind);
    d["sigma"] = py::make_tuple(static_cast<double>(t.pair.sigma1), static_cast<double>(t.pair.sigma2));
    d["m"] = t.m;
    return d;
}

std::vector<WeightedPoint> points(const std::vector<std::tuple<double, double, double>>& xs) {
    std::vector<WeightedPoint> out;
    for (const auto& [x, y, w] : xs) out.push_back({{x, y}, w});
    return out;
}

}  // namespace

PYBIND11_MODULE(_mflab, m) {
    m.doc() = "mean field equation toolkit on the flat torus";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    // mass algebra
    m.def("pohozaev_residual", [](double s1, double s2, double a) { return pohozaev_residual({s1, s2}, Intensity(a)); },
          py::arg("sigma1"), py::arg("sigma2"), py::arg("a"));
    m.def("classify_local_mass",
          [](double s1, double s2, double a, double tol) { return type_dict(classify_local_mass({s1, s2}, Intensity(a), tol)); },
          py::arg("sigma1"), py::arg("sigma2"), py::arg("a"), py::arg("tol") = 1e-2);
    m.def("solve_gamma_m", [](int mm, double a) { return solve_gamma_m(mm, Intensity(a)).roots; }, py::arg("m"), py::arg("a"));
    m.def("min_mass_rho2", [](double a) { return min_mass_rho2(Intensity(a)); }, py::arg("a"));
    m.def("admissible_eta_interval", [](double a) { return admissible_eta_interval(Intensity(a)); }, py::arg("a"));
    m.def("coercive_region", [](double r1, double r2, double a) { return coercive_region({r1, r2}, Intensity(a)); },
          py::arg("rho1"), py::arg("rho2"), py::arg("a"));
    m.def("sharp_threshold",
          [](const std::vector<std::pair<double, double>>& atoms) {
              std::vector<IntensityAtom> v;
              for (const auto& [alpha, w] : atoms) v.push_back({alpha, w});
              return sharp_threshold(AtomicIntensity(std::move(v)));
          },
          py::arg("atoms"));

    // radial shooting
    py::class_<RadialProfile>(m, "RadialProfile")
        .def_property_readonly("r", [](const RadialProfile& p) { return to_array(p.r); })
        .def_property_readonly("v", [](const RadialProfile& p) { return to_array(p.v); })
        .def_property_readonly("eta", [](const RadialProfile& p) { return to_array(p.eta); })
        .def_property_readonly("sigma1", [](const RadialProfile& p) { return to_array(p.sigma1); })
        .def_property_readonly("sigma2", [](const RadialProfile& p) { return to_array(p.sigma2); })
        .def("__len__", &RadialProfile::size);
    m.def(
        "shoot",
        [](double rho1, double rho2, double a, double c0, double v0, double r_max, double rtol, double atol) {
            ShootParams p;
            p.rho1 = rho1;
            p.rho2 = rho2;
            p.a = a;
            p.c0 = c0;
            p.v0 = v0;
            p.r_max = r_max;
            p.rtol = rtol;
            p.atol = atol;
            py::gil_scoped_release nogil;
            return shoot(p);
        },
        py::arg("rho1"), py::arg("rho2") = 0.0, py::arg("a") = 0.5, py::arg("c0") = 0.0, py::arg("v0") = 0.0,
        py::arg("r_max") = 1e4, py::arg("rtol") = 1e-10, py::arg("atol") = 1e-12);
    m.def("limit_mass", &limit_mass, py::arg("profile"), py::arg("window") = std::pair<double, double>{1e3, 1e4});
    m.def("verify_pohozaev", &verify_pohozaev, py::arg("profile"));

    // fields and the functional
    m.def(
        "evaluate_J",
        [](const Array& u, double rho1, double rho2, double a, std::optional<Array> h1, std::optional<Array> h2) {
            const TorusField f = to_field(u);
            return evaluate_J(f, {rho1, rho2}, Intensity(a), weights(f.grid(), h1, h2)).total;
        },
        py::arg("u"), py::arg("rho1"), py::arg("rho2"), py::arg("a"), py::arg("h1") = py::none(),
        py::arg("h2") = py::none());
    m.def(
        "el_residual",
        [](const Array& u, double rho1, double rho2, double a, std::optional<Array> h1, std::optional<Array> h2) {
            const TorusField f = to_field(u);
            return to_array(el_residual(f, {rho1, rho2}, Intensity(a), weights(f.grid(), h1, h2)));
        },
        py::arg("u"), py::arg("rho1"), py::arg("rho2"), py::arg("a"), py::arg("h1") = py::none(),
        py::arg("h2") = py::none());
    m.def(
        "solve",
        [](int n, double rho1, double rho2, double a, std::optional<Array> h1, std::optional<Array> h2,
           std::optional<Array> u0, double residual_tol, int max_iter) {
            const TorusGrid g(n);
            SolveConfig cfg{{rho1, rho2}, Intensity(a), weights(g, h1, h2), {}, {}};
            cfg.newton.residual_tol = residual_tol;
            cfg.newton.max_iter = max_iter;
            cfg.validate();
            const TorusField start = u0 ? to_field(*u0) : TorusField(g);
            SolutionRecord rec = [&] {
                py::gil_scoped_release nogil;
                return newton_solve(cfg, start);
            }();
            py::dict d;
            d["u"] = to_array(rec.u);
            d["residual_norm"] = rec.residual_norm;
            d["iterations"] = rec.iterations;
            d["J"] = rec.J_value.total;
            d["status"] = to_string(rec.status);
            return d;
        },
        py::arg("n"), py::arg("rho1"), py::arg("rho2"), py::arg("a"), py::arg("h1") = py::none(),
        py::arg("h2") = py::none(), py::arg("u0") = py::none(), py::arg("residual_tol") = 1e-10,
        py::arg("max_iter") = 50);

    // bubbles and transport
    m.def(
        "build_bubble",
        [](const std::vector<std::tuple<double, double, double>>& atoms, double lambda, int n) {
            return to_array(build_bubble({Barycenter(points(atoms)), lambda}, TorusGrid(n)).u);
        },
        py::arg("atoms"), py::arg("lam"), py::arg("n"));
    m.def(
        "wasserstein1",
        [](const std::vector<std::tuple<double, double, double>>& mu, const std::vector<std::tuple<double, double, double>>& nu) {
            const auto a = points(mu);
            const auto b = points(nu);
            return wasserstein1(a, b);
        },
        py::arg("mu"), py::arg("nu"));
}
