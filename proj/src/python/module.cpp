#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bbcu/analysis.hpp"
#include "bbcu/report.hpp"
#include "bbcu/roa.hpp"
#include "bbcu/scenario.hpp"

namespace py = pybind11;
using namespace bbcu;

namespace {

py::array_t<double> mat3_to_array(const Mat3& m) {
    py::array_t<double> out({3, 3});
    std::copy(m.begin(), m.end(), out.mutable_data());
    return out;
}

Mat3 array_to_mat3(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 2 || a.shape(0) != 3 || a.shape(1) != 3)
        throw py::value_error("expected a 3x3 matrix");
    Mat3 m;
    std::copy(a.data(), a.data() + 9, m.begin());
    return m;
}

py::dict run_to_dict(const SimResult& res) {
    const std::size_t n = res.trace.size();
    auto col = [&](auto getter) {
        py::array_t<double> arr(n);
        double* p = arr.mutable_data();
        for (std::size_t i = 0; i < n; ++i)
            p[i] = getter(res.trace[i]);
        return arr;
    };
    py::dict d;
    d["t"] = col([](const TraceRow& r) { return r.t; });
    d["x1"] = col([](const TraceRow& r) { return r.x1; });
    d["x2"] = col([](const TraceRow& r) { return r.x2; });
    d["x3"] = col([](const TraceRow& r) { return r.x3; });
    d["u"] = col([](const TraceRow& r) { return double(r.u); });
    d["sigma"] = col([](const TraceRow& r) { return r.sigma; });
    d["k"] = col([](const TraceRow& r) { return r.k; });
    d["Ig"] = col([](const TraceRow& r) { return r.I_g; });
    d["mode"] = col([](const TraceRow& r) { return double(r.mode); });
    d["IOL"] = col([](const TraceRow& r) { return r.I_OL_active; });
    py::list ev;
    for (const auto& e : res.mode_events)
        ev.append(py::make_tuple(e.t, e.from_mode, e.to_mode, e.reason, e.I_OL_active,
                                 e.gate_contains));
    d["mode_events"] = ev;
    d["first_sigma_cross"] = res.first_sigma_cross;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bidirectional converter (BBCU) simulation and analysis core";

    py::register_exception<ParamError>(m, "ParamError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<AnalysisError>(m, "AnalysisError");
    py::register_exception<RoaError>(m, "RoaError");

    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<>())
        .def_readwrite("E_H", &PlantParams::E_H)
        .def_readwrite("R_H", &PlantParams::R_H)
        .def_readwrite("L", &PlantParams::L)
        .def_readwrite("C_H", &PlantParams::C_H)
        .def_readwrite("E_L", &PlantParams::E_L)
        .def_readwrite("R_L", &PlantParams::R_L)
        .def_readwrite("C_L", &PlantParams::C_L)
        .def_readwrite("R_D", &PlantParams::R_D);

    py::class_<DerivedParams>(m, "DerivedParams")
        .def_readonly("R_DH", &DerivedParams::R_DH)
        .def_readonly("alpha", &DerivedParams::alpha)
        .def_readonly("beta_H", &DerivedParams::beta_H)
        .def_readonly("beta_L", &DerivedParams::beta_L);

    py::class_<PlantState>(m, "PlantState")
        .def(py::init<>())
        .def(py::init([](double x1, double x2, double x3) {
                 return PlantState{x1, x2, x3};
             }),
             py::arg("x1"), py::arg("x2"), py::arg("x3"))
        .def_readwrite("x1", &PlantState::x1)
        .def_readwrite("x2", &PlantState::x2)
        .def_readwrite("x3", &PlantState::x3);

    py::class_<StateBox>(m, "StateBox")
        .def(py::init<>())
        .def_readwrite("x1_min", &StateBox::x1_min)
        .def_readwrite("x1_max", &StateBox::x1_max)
        .def_readwrite("x2_min", &StateBox::x2_min)
        .def_readwrite("x2_max", &StateBox::x2_max)
        .def_readwrite("x3_min", &StateBox::x3_min)
        .def_readwrite("x3_max", &StateBox::x3_max);

    m.def("derive", &derive);
    m.def("rhs",
          [](const PlantState& x, double u, const PlantParams& p) {
              const auto d = derive(p);
              const PlantState f = rhs(x, u, d, p);
              return py::make_tuple(f.x1, f.x2, f.x3);
          },
          py::arg("state"), py::arg("u"), py::arg("params"));
    m.def("equilibrium", &equilibrium, py::arg("u_fixed"), py::arg("params"));
    m.def("dynamic_matrix_u1",
          [](const PlantParams& p) { return mat3_to_array(dynamic_matrix_u1(p)); });

    m.def("sigma", &sigma, py::arg("k"), py::arg("state"));
    m.def("relay", &relay);
    m.def("k_infinity_current", &k_infinity_current, py::arg("x1_ref"), py::arg("params"));
    m.def("k_infinity_voltage", &k_infinity_voltage, py::arg("x2_ref"), py::arg("params"));
    m.def("x2_ref_upper_bound", &x2_ref_upper_bound);
    m.def("routh_hurwitz_cubic",
          [](double a3, double a2, double a1, double a0) {
              return routh_hurwitz_cubic({a3, a2, a1, a0});
          });
    m.def("cubic_roots", [](double a3, double a2, double a1, double a0) {
        py::list out;
        for (const auto& r : cubic_roots({a3, a2, a1, a0}))
            out.append(std::complex<double>(r));
        return out;
    });
    m.def("mode2_dynamic_matrix",
          [](double k_star, double x2_ref, double x3_star, double gamma2,
             const PlantParams& p) {
              return mat3_to_array(mode2_dynamic_matrix(k_star, x2_ref, x3_star, gamma2, p));
          });
    m.def("spectral_abscissa",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
              return spectral_abscissa(array_to_mat3(a));
          });

    m.def("lyapunov_solve",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
             double shift) -> py::object {
              const auto P = lyapunov_solve(array_to_mat3(a), shift);
              if (!P)
                  return py::none();
              return mat3_to_array(*P);
          },
          py::arg("A"), py::arg("shift"));
    m.def("max_decay_gevp",
          [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
              const GevpResult g = max_decay_gevp(array_to_mat3(a));
              return py::make_tuple(g.lambda_star, mat3_to_array(g.P));
          });

    py::class_<RoaEstimate>(m, "RoaEstimate")
        .def_property_readonly("level", [](const RoaEstimate& r) { return r.level; })
        .def_property_readonly("center",
                               [](const RoaEstimate& r) {
                                   return py::make_tuple(r.lyap.center[0], r.lyap.center[1],
                                                         r.lyap.center[2]);
                               })
        .def_property_readonly("P", [](const RoaEstimate& r) { return mat3_to_array(r.lyap.P); })
        .def_property_readonly("decay", [](const RoaEstimate& r) { return r.lyap.decay; })
        .def("certified", &RoaEstimate::certified)
        .def("contains",
             [](const RoaEstimate& r, double k, double x2, double x3) {
                 return contains(r, PlantState{0.0, x2, x3}, k);
             },
             py::arg("k"), py::arg("x2"), py::arg("x3"))
        .def("projection", [](const RoaEstimate& r, int axis_a, int axis_b, int n) {
            const auto poly = project_roa(r, axis_a, axis_b, n);
            py::array_t<double> out({static_cast<py::ssize_t>(poly.size()), py::ssize_t(2)});
            double* p = out.mutable_data();
            for (const auto& pt : poly) {
                *p++ = pt[0];
                *p++ = pt[1];
            }
            return out;
        }, py::arg("axis_a"), py::arg("axis_b"), py::arg("n_points") = 128);

    m.def("roa_estimate",
          [](const PlantParams& p, double iol, double gamma2, const StateBox& box,
             double k_max, std::uint64_t seed) {
              CertificationParams cp;
              cp.seed = seed;
              return roa_estimate(p, iol, gamma2, box, k_max, cp);
          },
          py::arg("params"), py::arg("I_OL"), py::arg("gamma2"), py::arg("box"),
          py::arg("k_max") = 0.25, py::arg("seed") = 12345);

    m.def("run_scenario",
          [](const std::string& spec_arg, const std::string& out_dir) {
              ScenarioSpec spec = resolve_spec(spec_arg);
              if (!out_dir.empty())
                  spec.out_dir = out_dir;
              const ScenarioArtifacts art = run_scenario(spec);
              py::dict d = run_to_dict(art.result);
              d["trace_path"] = art.trace_path;
              d["modes_path"] = art.modes_path;
              return d;
          },
          py::arg("spec"), py::arg("out_dir") = std::string());
    m.def("simulate",
          [](const std::string& spec_arg) {
              ScenarioSpec spec = resolve_spec(spec_arg);
              CachingRoaProvider roas(spec);
              return run_to_dict(simulate(spec, roas));
          },
          py::arg("spec"));
    m.def("analysis_report", [](const std::string& spec_arg) {
        return analysis_report(resolve_spec(spec_arg));
    });
}
