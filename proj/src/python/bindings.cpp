#include "wgeom/catalog.hpp"
#include "wgeom/comparison.hpp"
#include "wgeom/errors.hpp"
#include "wgeom/experiment.hpp"
#include "wgeom/geodesy.hpp"
#include "wgeom/tensorcalc.hpp"
#include "wgeom/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wgeom;

namespace {

py::dict run_dict(const RunResult& r) {
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["status"] = r.status;
    d["csv"] = r.csv;
    d["summary"] = r.summary;
    d["log"] = r.log;
    return d;
}

py::dict report_dict(const ComparisonReport& rep) {
    py::dict d;
    d["theorem"] = rep.theorem;
    d["verdict"] = to_string(rep.verdict);
    d["margin"] = rep.margin;
    d["tolerance"] = rep.tolerance;
    d["measured"] = rep.measured;
    d["hypothesis_satisfied"] = rep.hypothesis.satisfied;
    d["sampled_K"] = rep.hypothesis.sampled_K;
    d["csv"] = rep.csv();
    d["log"] = rep.log;
    return d;
}

} // namespace

PYBIND11_MODULE(_wgeom, m) {
    m.doc() = "Weighted affine connections on manifolds with density";

    static py::exception<Error> base(m, "Error");
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SchemaError&) {
            throw;
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    py::class_<Settings>(m, "Settings")
        .def(py::init<>())
        .def_readwrite("ode_rtol", &Settings::ode_rtol)
        .def_readwrite("ode_atol", &Settings::ode_atol)
        .def_readwrite("chart_margin", &Settings::chart_margin)
        .def_readwrite("angular_samples", &Settings::angular_samples)
        .def_readwrite("profile_samples", &Settings::profile_samples)
        .def_readwrite("seed", &Settings::seed);

    py::class_<Chart>(m, "Chart")
        .def_property_readonly("name", &Chart::name)
        .def_property_readonly("dim", &Chart::dim)
        .def_property_readonly("coords", &Chart::coords)
        .def("metric", &Chart::metric, py::arg("x"))
        .def("f", &Chart::f, py::arg("x"))
        .def("alpha", &Chart::alpha, py::arg("x"))
        .def("with_density", py::overload_cast<const std::string&>(&Chart::with_density, py::const_), py::arg("f"))
        .def("with_potential", py::overload_cast<const std::string&>(&Chart::with_potential, py::const_),
             py::arg("phi"))
        .def("__repr__", [](const Chart& c) { return "<Chart " + c.name() + " (" + c.weight_label() + ")>"; });

    m.def("build", py::overload_cast<const std::string&>(&catalog_build), py::arg("call"),
          "Build a catalog chart from a call such as 'sphere_polar(2)'");
    m.def("catalog_manifest", [] { return catalog_manifest().dump(2); });

    m.def("christoffel", [](const Chart& c, const Vec& p) { return christoffel_symbols(c, p); });
    m.def("weighted_symbols", [](const Chart& c, const Vec& p) { return weighted_symbols(c, p); });
    m.def(
        "ric_f", [](const Chart& c, const Vec& p, const Vec& Y, const Vec& Z, double N) { return ric_f(c, p, Y, Z, N).value; },
        py::arg("chart"), py::arg("p"), py::arg("Y"), py::arg("Z"), py::arg("N") = 1.0);
    m.def(
        "curvature_alpha",
        [](const Chart& c, const Vec& p, const Vec& X, const Vec& Y, const Vec& Z, bool oracle) {
            return curvature_alpha(c, p, X, Y, Z,
                                   oracle ? CurvatureMethod::coefficient_oracle : CurvatureMethod::analytic_formula)
                .value;
        },
        py::arg("chart"), py::arg("p"), py::arg("X"), py::arg("Y"), py::arg("Z"), py::arg("oracle") = false);
    m.def("volume_form_residual", &volume_form_parallel_residual, py::arg("chart"), py::arg("p"), py::arg("X"));

    m.def(
        "geodesic",
        [](const Chart& c, const Vec& p, const Vec& v, double T, bool weighted) {
            const CurvePath path =
                integrate_geodesic(c, p, v, T, weighted ? Connection::weighted : Connection::levi_civita);
            std::vector<Vec> xs;
            for (const auto& node : path.nodes) xs.push_back(node.x);
            return xs;
        },
        py::arg("chart"), py::arg("p"), py::arg("v"), py::arg("T"), py::arg("weighted") = false);
    m.def(
        "repar_distance",
        [](const Chart& c, const Vec& p, const Vec& q) {
            const DistanceResult d = repar_distance(c, p, q);
            py::dict out;
            out["s"] = d.s;
            out["d_g"] = d.d_g;
            out["minimal_count"] = d.minimal_count;
            return out;
        },
        py::arg("chart"), py::arg("p"), py::arg("q"));

    m.def(
        "holonomy",
        [](const Chart& c, const std::vector<Vec>& loop) {
            return holonomy_element(c, PiecewiseCurve::polyline(loop)).matrix;
        },
        py::arg("chart"), py::arg("loop"), "Holonomy of a closed polyline in the coordinate frame");
    m.def(
        "algebra_element",
        [](const Chart& c, const std::string& family, double s0) {
            const LoopFamily fam = family == "sphere_latitude"    ? sphere_latitude_family()
                                   : family == "sphere_rectangle" ? sphere_rectangle_family()
                                                                  : throw InvalidArgument("transport", "unknown family");
            return algebra_element(c, fam, s0).matrix;
        },
        py::arg("chart"), py::arg("family"), py::arg("s0"));
    m.def("generated_algebra_dim", [](const std::vector<Mat>& e) { return generated_algebra_dim(e); });

    m.def(
        "mean_curvature_check",
        [](const Chart& c, const Vec& p, const Vec& direction, double r_max, double K) {
            const RadialProfile pr = radial_profile(c, p, direction, r_max);
            return report_dict(mean_curvature_check(pr, {c.dim(), K}));
        },
        py::arg("chart"), py::arg("p"), py::arg("direction"), py::arg("r_max"), py::arg("K"));
    m.def(
        "one_dim_error", [](int K, double a, double c, double s0, double s1) {
            return one_dim_closed_forms(K, a, c, s0, s1).max_error;
        },
        py::arg("K"), py::arg("a"), py::arg("c"), py::arg("s0"), py::arg("s1"));

    m.def(
        "run_spec",
        [](const std::string& text) {
            const ExperimentSpec spec = parse_spec(nlohmann::json::parse(text));
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(spec);
            }
            return run_dict(r);
        },
        py::arg("spec_json"), "Validate and run an experiment spec given as JSON text");
    m.def("bundle", [] {
        py::list out;
        for (const auto& e : reproduction_bundle()) {
            py::dict d;
            d["name"] = e.name;
            d["description"] = e.description;
            d["expected"] = e.expected;
            d["spec"] = e.spec.dump();
            out.append(d);
        }
        return out;
    });
    m.def("task_names", &task_names);
}
