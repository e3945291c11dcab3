#include "supraflow/errors.hpp"
#include "supraflow/harness.hpp"
#include "supraflow/scenario_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace supraflow;

namespace {

// Samples stacked row-wise: one row per recorded time.
Matrix stack(const Trajectory& traj, Vector FlowState::*part) {
    if (traj.samples.empty()) return Matrix();
    const Eigen::Index cols = (traj.samples.front().*part).size();
    Matrix out(static_cast<Eigen::Index>(traj.samples.size()), cols);
    for (std::size_t k = 0; k < traj.samples.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = traj.samples[k].*part;
    return out;
}

Vector times(const Trajectory& traj) {
    Vector t(static_cast<Eigen::Index>(traj.samples.size()));
    for (std::size_t k = 0; k < traj.samples.size(); ++k) t(static_cast<Eigen::Index>(k)) = traj.samples[k].t;
    return t;
}

FlowState saddle_state(const Vector& y, const Vector& lambda) {
    FlowState s;
    s.y = y;
    s.lambda = lambda;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Consensus optimization flows on multiplex networks";

    // Errors. InvalidModel doubles as ValueError, IoError as OSError.
    auto base = py::register_exception<Error>(m, "SupraflowError", PyExc_RuntimeError);
    py::register_exception<InvalidModel>(m, "InvalidModel", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
    py::register_exception<EigenNonconvergence>(m, "EigenNonconvergence", base.ptr());
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // -- graph --------------------------------------------------------------
    py::class_<LayerGraph>(m, "LayerGraph")
        .def(py::init<Matrix>(), py::arg("weights"))
        .def_static("empty", &LayerGraph::empty, py::arg("n_nodes"))
        .def_static("ring", &LayerGraph::ring, py::arg("n_nodes"), py::arg("weight") = 1.0)
        .def_static("complete", &LayerGraph::complete, py::arg("n_nodes"), py::arg("weight") = 1.0)
        .def_static("path", &LayerGraph::path, py::arg("n_nodes"), py::arg("weight") = 1.0)
        .def_static(
            "from_edges",
            [](int n, const std::vector<std::tuple<int, int, double>>& edges) {
                std::vector<LayerGraph::Edge> e;
                for (const auto& [a, b, w] : edges) e.push_back({a, b, w});
                return LayerGraph::from_edges(n, e);
            },
            py::arg("n_nodes"), py::arg("edges"), "Edges as (from, to, weight), 0-based.")
        .def_property_readonly("n_nodes", &LayerGraph::n_nodes)
        .def_property_readonly("weights", &LayerGraph::weights)
        .def("strength", &LayerGraph::strength)
        .def("__eq__", &LayerGraph::operator==);

    py::class_<MultiplexNetwork>(m, "MultiplexNetwork")
        .def(py::init<std::vector<LayerGraph>, std::vector<double>, Matrix>(), py::arg("layers"),
             py::arg("intra_diffusion"), py::arg("inter_diffusion"))
        .def_static("uniform", &MultiplexNetwork::uniform, py::arg("layers"), py::arg("intra_diffusion"),
                    py::arg("inter_diffusion"))
        .def_property_readonly("n_nodes", &MultiplexNetwork::n_nodes)
        .def_property_readonly("n_layers", &MultiplexNetwork::n_layers)
        .def_property_readonly("dim", &MultiplexNetwork::dim)
        .def_property_readonly("layers", &MultiplexNetwork::layers)
        .def_property_readonly("intra_diffusion", py::overload_cast<>(&MultiplexNetwork::intra_diffusion, py::const_))
        .def_property_readonly("inter_diffusion", py::overload_cast<>(&MultiplexNetwork::inter_diffusion, py::const_))
        .def("index", &MultiplexNetwork::index, py::arg("node"), py::arg("layer"))
        .def("with_inter_diffusion", &MultiplexNetwork::with_inter_diffusion)
        .def("without_interlayer", &MultiplexNetwork::without_interlayer)
        .def("scaled", &MultiplexNetwork::scaled);

    py::class_<SupraLaplacian>(m, "SupraLaplacian")
        .def_property_readonly("entries", &SupraLaplacian::entries)
        .def_property_readonly("dim", &SupraLaplacian::dim)
        .def_property_readonly("n_nodes", &SupraLaplacian::n_nodes)
        .def_property_readonly("n_layers", &SupraLaplacian::n_layers)
        .def("apply", py::overload_cast<const Vector&>(&SupraLaplacian::apply, py::const_));

    m.def("layer_laplacian", &layer_laplacian);
    m.def("supra_adjacency", &supra_adjacency);
    m.def("supra_laplacian", &supra_laplacian);
    m.def("is_connected", &is_connected);
    m.def(
        "symmetric_eigen",
        [](const Matrix& a, double tolerance, int max_sweeps) {
            auto ed = symmetric_eigen(a, JacobiOptions{tolerance, max_sweeps});
            return py::make_tuple(ed.values, ed.vectors);
        },
        py::arg("a"), py::arg("tolerance") = 1e-12, py::arg("max_sweeps") = 100,
        "Returns (ascending eigenvalues, eigenvector columns).");
    m.def("spectrum", [](const SupraLaplacian& sl) { return spectrum(sl); });
    m.def("algebraic_connectivity", &algebraic_connectivity);

    // -- objectives ---------------------------------------------------------
    py::class_<Quadratic>(m, "Quadratic")
        .def(py::init<double, double>(), py::arg("curvature"), py::arg("linear") = 0.0)
        .def_readwrite("curvature", &Quadratic::curvature)
        .def_readwrite("linear", &Quadratic::linear)
        .def("__eq__", &Quadratic::operator==)
        .def("__repr__", [](const Quadratic& q) {
            std::ostringstream os;
            os << "Quadratic(" << format_double(q.curvature) << ", " << format_double(q.linear) << ")";
            return os.str();
        });

    py::class_<ReplicaCost>(m, "ReplicaCost")
        .def(py::init<Quadratic>())
        .def_static("zero", &ReplicaCost::zero)
        .def_static(
            "custom",
            [](std::function<double(double)> value, std::function<double(double)> gradient, double hint) {
                return ReplicaCost(CustomSmooth{std::move(value), std::move(gradient), hint});
            },
            py::arg("value"), py::arg("gradient"), py::arg("lipschitz_hint"))
        .def("value", &ReplicaCost::value)
        .def("gradient", &ReplicaCost::gradient)
        .def_property_readonly("lipschitz_hint", &ReplicaCost::lipschitz_hint)
        .def_property_readonly("is_quadratic", &ReplicaCost::is_quadratic);
    py::implicitly_convertible<Quadratic, ReplicaCost>();

    py::class_<ObjectiveSet>(m, "ObjectiveSet")
        .def(py::init<int, int, std::vector<ReplicaCost>>(), py::arg("n_nodes"), py::arg("n_layers"),
             py::arg("costs"))
        .def_static("uniform", &ObjectiveSet::uniform)
        .def_property_readonly("n_nodes", &ObjectiveSet::n_nodes)
        .def_property_readonly("n_layers", &ObjectiveSet::n_layers)
        .def_property_readonly("dim", &ObjectiveSet::dim)
        .def("at", &ObjectiveSet::at, py::arg("node"), py::arg("layer"))
        .def("lipschitz_bound", &ObjectiveSet::lipschitz_bound)
        .def("all_quadratic", &ObjectiveSet::all_quadratic);

    py::class_<KktReport>(m, "KktReport")
        .def_readonly("consensus_residual", &KktReport::consensus_residual)
        .def_readonly("stationarity_residual", &KktReport::stationarity_residual)
        .def_readonly("passed", &KktReport::pass);

    m.def("global_value", &global_value);
    m.def("stacked_value", &stacked_value);
    m.def("stacked_gradient", py::overload_cast<const ObjectiveSet&, const Vector&>(&stacked_gradient));
    m.def("quadratic_optimum", &quadratic_optimum);
    m.def("check_kkt", &check_kkt, py::arg("objectives"), py::arg("laplacian"), py::arg("y"), py::arg("lam"),
          py::arg("tol"));
    m.def("persistent_gain", &persistent_gain, py::arg("theta"), py::arg("t"));

    // -- dynamics -----------------------------------------------------------
    m.def(
        "saddle_rhs",
        [](const SupraLaplacian& sl, const ObjectiveSet& obj, const Vector& y, const Vector& lambda) {
            auto d = saddle_rhs(sl, obj, saddle_state(y, lambda));
            return py::make_tuple(d.dy, d.dlambda);
        },
        py::arg("laplacian"), py::arg("objectives"), py::arg("y"), py::arg("lam"));
    m.def(
        "saddle_rhs_per_agent",
        [](const MultiplexNetwork& net, const ObjectiveSet& obj, const Vector& y, const Vector& lambda) {
            auto d = saddle_rhs_per_agent(net, obj, saddle_state(y, lambda));
            return py::make_tuple(d.dy, d.dlambda);
        },
        py::arg("network"), py::arg("objectives"), py::arg("y"), py::arg("lam"));
    m.def("reference_dual", &reference_dual, py::arg("laplacian"), py::arg("objectives"), py::arg("xstar"),
          py::arg("offset") = 0.0);
    m.def("consensus_residual", &consensus_residual);

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<double, double, int>(), py::arg("step") = 0.01, py::arg("t_end") = 1.0,
             py::arg("record_every") = 1)
        .def_readwrite("step", &IntegratorConfig::step)
        .def_readwrite("t_end", &IntegratorConfig::t_end)
        .def_readwrite("record_every", &IntegratorConfig::record_every);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("scenario_id", &Trajectory::scenario_id)
        .def_readonly("dynamics", &Trajectory::dynamics)
        .def_property_readonly("t", &times)
        .def_property_readonly("y", [](const Trajectory& t) { return stack(t, &FlowState::y); })
        .def_property_readonly("lam", [](const Trajectory& t) { return stack(t, &FlowState::lambda); })
        .def_property_readonly("mu", [](const Trajectory& t) { return stack(t, &FlowState::mu); })
        .def_property_readonly("v", [](const Trajectory& t) { return stack(t, &FlowState::v); })
        .def("__len__", [](const Trajectory& t) { return t.samples.size(); })
        .def(
            "to_csv",
            [](const Trajectory& t, int n_nodes) {
                std::ostringstream os;
                write_trajectory_csv(os, t, n_nodes);
                return os.str();
            },
            py::arg("n_nodes"));

    // -- harness ------------------------------------------------------------
    py::enum_<DispatchOrder>(m, "DispatchOrder")
        .value("FIRST", DispatchOrder::First)
        .value("SECOND", DispatchOrder::Second);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("id", &Scenario::id)
        .def_readwrite("integrator", &Scenario::integrator)
        .def_property(
            "eps", [](const Scenario& s) { return s.detection.eps; },
            [](Scenario& s, double eps) { s.detection.eps = eps; })
        .def_property(
            "seed", [](const Scenario& s) { return s.initial.seed; },
            [](Scenario& s, std::optional<std::uint64_t> seed) { s.initial.seed = seed; })
        .def_property_readonly("dynamics", [](const Scenario& s) { return std::string(to_string(s.dynamics.kind)); })
        .def("set_interlayer",
             [](Scenario& s, int first, int second, double d) { s.network.set_interlayer(first, second, d); })
        .def("network", [](const Scenario& s) { return s.network.build(); })
        .def("objectives",
             [](const Scenario& s) { return s.objectives.build(s.network.nodes, static_cast<int>(s.network.layers.size())); })
        .def("laplacian", &scenario_laplacian)
        .def("validate", &Scenario::validate)
        .def("to_yaml", &serialize_scenario)
        .def_static("from_yaml", [](const std::string& text) { return parse_scenario(text); })
        .def("__eq__", &Scenario::operator==);

    m.def("build_vi_a_scenario", &build_vi_a_scenario);
    m.def("build_vi_b_scenario", &build_vi_b_scenario, py::arg("n_nodes") = 7);
    m.def("build_dispatch_scenario", &build_dispatch_scenario, py::arg("order") = DispatchOrder::First);
    m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); });
    m.def("load_scenario", &load_scenario);
    m.def("save_scenario", &save_scenario);
    m.def("serialize_scenario", &serialize_scenario);
    m.def("emit_builtin_scenarios", &emit_builtin_scenarios);
    m.def("reference_optimum", &reference_optimum);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("trajectory", &RunResult::trajectory)
        .def_readonly("xstar", &RunResult::xstar)
        .def_readonly("final_max_error", &RunResult::final_max_error)
        .def_readonly("t_c", &RunResult::t_c);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("d_x", &SweepRow::dx)
        .def_readonly("t_c", &SweepRow::t_c)
        .def_readonly("lambda_2", &SweepRow::lambda_2)
        .def_readonly("failed", &SweepRow::failed)
        .def_readonly("error", &SweepRow::error);

    py::class_<DispatchResult>(m, "DispatchResult")
        .def_readonly("trajectory", &DispatchResult::trajectory)
        .def_readonly("power_balance_residual", &DispatchResult::power_balance_residual)
        .def_readonly("gas_balance_residual", &DispatchResult::gas_balance_residual)
        .def_readonly("per_layer_consensus_residual", &DispatchResult::per_layer_consensus_residual)
        .def_readonly("layer_means", &DispatchResult::layer_means);

    m.def("run_scenario", &run_scenario, py::call_guard<py::gil_scoped_release>());
    m.def("run_dispatch", &run_dispatch, py::call_guard<py::gil_scoped_release>());
    m.def("detect_consensus_time", &detect_consensus_time, py::arg("trajectory"), py::arg("xstar"), py::arg("eps"));
    m.def("log_spaced", &log_spaced, py::arg("lo"), py::arg("hi"), py::arg("points"));
    m.def("sweep_interlayer", &sweep_interlayer, py::arg("base"), py::arg("dx_values"), py::arg("eps"),
          py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("sweep_csv", &sweep_csv);
    m.def("run_summary_json", &run_summary_json);
    m.def("dispatch_summary_json", &dispatch_summary_json);
}
