#include "supraflow/harness.hpp"

#include "supraflow/errors.hpp"
#include "supraflow/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace supraflow {

// ---------------------------------------------------------------------------
// Enum names

std::string_view to_string(Topology t) {
    switch (t) {
        case Topology::Empty: return "empty";
        case Topology::Ring: return "ring";
        case Topology::Complete: return "complete";
        case Topology::Path: return "path";
        case Topology::Edges: return "edges";
        case Topology::Weights: return "weights";
    }
    return "unknown";
}

Topology topology_from_string(std::string_view text) {
    for (auto t : {Topology::Empty, Topology::Ring, Topology::Complete, Topology::Path,
                   Topology::Edges, Topology::Weights}) {
        if (to_string(t) == text) return t;
    }
    throw InvalidModel("unknown topology '" + std::string(text) + "'");
}

std::string_view to_string(ObjectiveGenerator g) {
    switch (g) {
        case ObjectiveGenerator::LayeredLinear: return "vi-a-layered-linear";
        case ObjectiveGenerator::Uniform: return "uniform";
        case ObjectiveGenerator::Zero: return "zero";
        case ObjectiveGenerator::Explicit: return "explicit";
    }
    return "unknown";
}

ObjectiveGenerator objective_generator_from_string(std::string_view text) {
    for (auto g : {ObjectiveGenerator::LayeredLinear, ObjectiveGenerator::Uniform,
                   ObjectiveGenerator::Zero, ObjectiveGenerator::Explicit}) {
        if (to_string(g) == text) return g;
    }
    throw InvalidModel("unknown objective generator '" + std::string(text) + "'");
}

std::string_view to_string(DynamicsKind k) {
    switch (k) {
        case DynamicsKind::Saddle: return "saddle";
        case DynamicsKind::GradientFlow: return "gradient_flow";
        case DynamicsKind::Penalty: return "penalty";
        case DynamicsKind::Dispatch: return "dispatch";
    }
    return "unknown";
}

DynamicsKind dynamics_kind_from_string(std::string_view text) {
    for (auto k : {DynamicsKind::Saddle, DynamicsKind::GradientFlow, DynamicsKind::Penalty,
                   DynamicsKind::Dispatch}) {
        if (to_string(k) == text) return k;
    }
    throw InvalidModel("unknown dynamics '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Built-in scenario builders

LayerGraph LayerSpec::build(int n_nodes) const {
    switch (topology) {
        case Topology::Empty: return LayerGraph::empty(n_nodes);
        case Topology::Ring: return LayerGraph::ring(n_nodes, weight);
        case Topology::Complete: return LayerGraph::complete(n_nodes, weight);
        case Topology::Path: return LayerGraph::path(n_nodes, weight);
        case Topology::Edges: {
            std::vector<LayerGraph::Edge> list;
            list.reserve(edges.size());
            for (const auto& e : edges) list.push_back({e.from, e.to, e.weight});
            return LayerGraph::from_edges(n_nodes, list);
        }
        case Topology::Weights: {
            if (static_cast<int>(weights.size()) != n_nodes) {
                throw InvalidModel("weight matrix must have one row per node");
            }
            Matrix w(n_nodes, n_nodes);
            for (int i = 0; i < n_nodes; ++i) {
                const auto& row = weights[static_cast<std::size_t>(i)];
                if (static_cast<int>(row.size()) != n_nodes) {
                    throw InvalidModel("weight matrix must be square");
                }
                for (int j = 0; j < n_nodes; ++j) w(i, j) = row[static_cast<std::size_t>(j)];
            }
            return LayerGraph(std::move(w));
        }
    }
    throw InvalidModel("unknown topology");
}

MultiplexNetwork NetworkSpec::build() const {
    if (nodes < 1) throw InvalidModel("network needs at least one node");
    if (layers.empty()) throw InvalidModel("network needs at least one layer");
    const int m = static_cast<int>(layers.size());
    std::vector<LayerGraph> graphs;
    std::vector<double> intra;
    for (const auto& l : layers) {
        graphs.push_back(l.build(nodes));
        intra.push_back(l.diffusion);
    }
    Matrix inter = Matrix::Zero(m, m);
    for (const auto& c : interlayer) {
        if (c.first < 0 || c.first >= m || c.second < 0 || c.second >= m || c.first == c.second) {
            throw InvalidModel("interlayer coupling names an invalid layer pair");
        }
        inter(c.first, c.second) = c.diffusion;
        inter(c.second, c.first) = c.diffusion;
    }
    return MultiplexNetwork(std::move(graphs), std::move(intra), std::move(inter));
}

void NetworkSpec::set_interlayer(int first, int second, double diffusion) {
    for (auto& c : interlayer) {
        if ((c.first == first && c.second == second) || (c.first == second && c.second == first)) {
            c.diffusion = diffusion;
            return;
        }
    }
    interlayer.push_back({first, second, diffusion});
}

ObjectiveSet ObjectiveSpec::build(int n_nodes, int n_layers) const {
    std::vector<ReplicaCost> list;
    list.reserve(static_cast<std::size_t>(n_nodes * n_layers));
    switch (generator) {
        case ObjectiveGenerator::LayeredLinear:
            for (int alpha = 0; alpha < n_layers; ++alpha) {
                for (int i = 0; i < n_nodes; ++i) {
                    list.emplace_back(Quadratic{1.0, static_cast<double>(i + 1 + n_nodes * alpha)});
                }
            }
            break;
        case ObjectiveGenerator::Uniform:
            list.assign(static_cast<std::size_t>(n_nodes * n_layers), ReplicaCost(uniform));
            break;
        case ObjectiveGenerator::Zero:
            list.assign(static_cast<std::size_t>(n_nodes * n_layers), ReplicaCost::zero());
            break;
        case ObjectiveGenerator::Explicit:
            if (static_cast<int>(costs.size()) != n_nodes * n_layers) {
                throw InvalidModel("explicit objectives need one cost per replica node");
            }
            for (const auto& q : costs) list.emplace_back(q);
            break;
    }
    return ObjectiveSet(n_nodes, n_layers, std::move(list));
}

DispatchConstraints DispatchSpec::build(int n_nodes) const {
    return DispatchConstraints(n_nodes, roles, power_demand, gas_demand, phi);
}

void Scenario::validate() const {
    if (id.empty()) throw InvalidModel("scenario id must be nonempty");
    const MultiplexNetwork net = network.build();
    const ObjectiveSet obj = objectives.build(net.n_nodes(), net.n_layers());
    integrator.validate();
    if (!(detection.eps > 0.0)) throw InvalidModel("detection eps must be positive");

    const bool is_dispatch = dynamics.kind == DynamicsKind::Dispatch;
    if (is_dispatch != dispatch.has_value()) {
        throw InvalidModel(is_dispatch ? "dispatch dynamics need a dispatch section"
                                       : "dispatch section given for non-dispatch dynamics");
    }
    if (is_dispatch) {
        (void)dispatch->build(net.n_nodes());
        if (net.n_layers() != 3) throw InvalidModel("dispatch needs a three-layer network");
        if (dispatch->clamp && static_cast<int>(dispatch->bounds.size()) != net.n_layers()) {
            throw InvalidModel("clamp mode needs one bounds entry per layer");
        }
        for (const auto& b : dispatch->bounds) {
            if (!(b.lower <= b.upper)) throw InvalidModel("bounds need lower <= upper");
        }
    } else if (detection.reference == ReferenceKind::QuadraticOptimum && !obj.all_quadratic()) {
        throw InvalidModel("quadratic_optimum reference needs quadratic objectives; give an explicit xstar");
    }
    if (dynamics.kind == DynamicsKind::GradientFlow && !(dynamics.theta > 0.0)) {
        throw InvalidModel("gradient_flow needs theta > 0");
    }
    if (dynamics.kind == DynamicsKind::Penalty && !(dynamics.rho > 0.0)) {
        throw InvalidModel("penalty needs rho > 0");
    }

    switch (initial.mode) {
        case InitialMode::Zero: break;
        case InitialMode::Random:
            if (!initial.seed) throw InvalidModel("random initial state needs an explicit seed");
            if (!(initial.range > 0.0)) throw InvalidModel("random initial range must be positive");
            break;
        case InitialMode::Explicit:
            if (static_cast<int>(initial.y.size()) != net.dim()) {
                throw InvalidModel("explicit initial y needs N*M entries");
            }
            if (!initial.lambda.empty() && static_cast<int>(initial.lambda.size()) != net.dim()) {
                throw InvalidModel("explicit initial lambda needs N*M entries");
            }
            break;
    }
}

// ---------------------------------------------------------------------------
// Built-in experiments

Scenario build_vi_a_scenario() {
    Scenario s;
    s.id = "vi_a";
    s.network.nodes = 3;
    s.network.layers = {LayerSpec{Topology::Complete, 1.0, {}, {}, 1.0},
                        LayerSpec{Topology::Complete, 1.0, {}, {}, 1.0}};
    s.network.interlayer = {{0, 1, 1.0}};
    s.objectives.generator = ObjectiveGenerator::LayeredLinear;
    s.dynamics.kind = DynamicsKind::Saddle;
    s.integrator = IntegratorConfig{0.01, 60.0, 10};
    s.detection = DetectionSpec{1e-2, ReferenceKind::QuadraticOptimum, 0.0};
    return s;
}

Scenario build_vi_b_scenario(int n_nodes) {
    Scenario s;
    s.id = "vi_b";
    s.network.nodes = n_nodes;
    s.network.layers = {LayerSpec{Topology::Ring, 1.0, {}, {}, 1.0},
                        LayerSpec{Topology::Complete, 1.0, {}, {}, 1.0}};
    s.network.interlayer = {{0, 1, 1.0}};
    s.objectives.generator = ObjectiveGenerator::LayeredLinear;
    s.dynamics.kind = DynamicsKind::Saddle;
    s.integrator = IntegratorConfig{0.01, 200.0, 10};
    s.detection = DetectionSpec{1e-2, ReferenceKind::QuadraticOptimum, 0.0};
    return s;
}

Scenario build_dispatch_scenario(DispatchOrder order) {
    Scenario s;
    s.id = "dispatch";
    s.network.nodes = 7;
    s.network.layers = {LayerSpec{Topology::Ring, 1.0, {}, {}, 0.2},
                        LayerSpec{Topology::Complete, 1.0, {}, {}, 0.8},
                        LayerSpec{Topology::Ring, 1.0, {}, {}, 0.2}};
    // Chain coupling T - K - G; no direct T - G interlinks.
    s.network.interlayer = {{0, 1, 0.6}, {1, 2, 0.6}};
    s.objectives.generator = ObjectiveGenerator::Uniform;
    s.objectives.uniform = Quadratic{1.0, 0.0};
    s.dynamics.kind = DynamicsKind::Dispatch;
    s.dynamics.order = order;
    s.dispatch = DispatchSpec{};
    s.integrator = IntegratorConfig{0.01, 200.0, 10};
    s.detection = DetectionSpec{1e-2, ReferenceKind::Explicit, 0.0};
    return s;
}

// ---------------------------------------------------------------------------
// Runners

SupraLaplacian scenario_laplacian(const Scenario& s) {
    const MultiplexNetwork net = s.network.build();
    if (s.dispatch && s.dispatch->coupling == ConsensusCoupling::Intralayer) {
        return supra_laplacian(net.without_interlayer());
    }
    return supra_laplacian(net);
}

FlowSystem build_flow_system(const Scenario& s) {
    s.validate();
    const MultiplexNetwork net = s.network.build();
    ObjectiveSet obj = s.objectives.build(net.n_nodes(), net.n_layers());
    FlowKind kind = SaddleFlow{};
    switch (s.dynamics.kind) {
        case DynamicsKind::Saddle: kind = SaddleFlow{}; break;
        case DynamicsKind::GradientFlow: kind = GradientFlow{s.dynamics.theta}; break;
        case DynamicsKind::Penalty: kind = PenaltyFlow{s.dynamics.rho}; break;
        case DynamicsKind::Dispatch:
            kind = DispatchFlow{s.dispatch->build(net.n_nodes()), s.dynamics.order};
            break;
    }
    return FlowSystem(scenario_laplacian(s), std::move(obj), std::move(kind));
}

FlowState initial_state(const Scenario& s, const FlowSystem& system) {
    FlowState s0 = system.zero_state();
    const auto& layout = system.layout();
    switch (s.initial.mode) {
        case InitialMode::Zero: break;
        case InitialMode::Random: {
            UniformSampler draw(*s.initial.seed);
            const double r = s.initial.range;
            for (Eigen::Index k = 0; k < s0.y.size(); ++k) s0.y(k) = draw(-r, r);
            if (layout.lambda) {
                for (Eigen::Index k = 0; k < s0.lambda.size(); ++k) s0.lambda(k) = draw(-r, r);
            }
            break;
        }
        case InitialMode::Explicit:
            s0.y = Eigen::Map<const Vector>(s.initial.y.data(), static_cast<Eigen::Index>(s.initial.y.size()));
            if (layout.lambda && !s.initial.lambda.empty()) {
                s0.lambda = Eigen::Map<const Vector>(s.initial.lambda.data(),
                                                     static_cast<Eigen::Index>(s.initial.lambda.size()));
            }
            break;
    }
    return s0;
}

double reference_optimum(const Scenario& s) {
    if (s.detection.reference == ReferenceKind::Explicit) return s.detection.xstar;
    const MultiplexNetwork net = s.network.build();
    return quadratic_optimum(s.objectives.build(net.n_nodes(), net.n_layers()));
}

namespace {

double max_error(const Vector& y, double xstar) {
    return (y.array() - xstar).abs().maxCoeff();
}

StateProjection clamp_projection(const Scenario& s) {
    if (!s.dispatch || !s.dispatch->clamp) return {};
    const int n = s.network.nodes;
    const auto bounds = s.dispatch->bounds;
    return [n, bounds](FlowState& state) {
        for (std::size_t a = 0; a < bounds.size(); ++a) {
            auto seg = state.y.segment(static_cast<Eigen::Index>(a) * n, n);
            seg = seg.cwiseMax(bounds[a].lower).cwiseMin(bounds[a].upper);
        }
    };
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
    if (s.dynamics.kind == DynamicsKind::Dispatch) {
        throw InvalidModel("dispatch scenarios are run with run_dispatch");
    }
    const FlowSystem system = build_flow_system(s);
    RunResult r;
    r.trajectory = integrate(system, initial_state(s, system), s.integrator);
    r.trajectory.scenario_id = s.id;
    r.xstar = reference_optimum(s);
    r.final_max_error = max_error(r.trajectory.final_state().y, r.xstar);
    r.t_c = detect_consensus_time(r.trajectory, r.xstar, s.detection.eps);
    return r;
}

std::optional<double> detect_consensus_time(const Trajectory& traj, double xstar, double eps) {
    const auto& samples = traj.samples;
    if (samples.empty()) return std::nullopt;
    // Walk back from the end while the band holds.
    std::size_t first_inside = samples.size();
    for (std::size_t k = samples.size(); k-- > 0;) {
        if (max_error(samples[k].y, xstar) > eps) break;
        first_inside = k;
    }
    if (first_inside == samples.size()) return std::nullopt;
    return samples[first_inside].t;
}

std::vector<double> log_spaced(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) {
        throw InvalidModel("log grid needs 0 < lo < hi and at least two points");
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int k = 0; k < points; ++k) {
        out[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (points - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

SweepResult sweep_interlayer(const Scenario& base, const std::vector<double>& dx_values, double eps,
                             int jobs) {
    if (base.network.layers.size() != 2) throw InvalidModel("interlayer sweep needs a two-layer scenario");
    if (!std::is_sorted(dx_values.begin(), dx_values.end())) {
        throw InvalidModel("sweep values must be ascending");
    }
    if (!(eps > 0.0)) throw InvalidModel("detection eps must be positive");
    base.validate();

    SweepResult rows(dx_values.size());
    auto run_point = [&](std::size_t k) {
        SweepRow& row = rows[k];
        row.dx = dx_values[k];
        row.lambda_2 = 0.0;
        try {
            Scenario s = base;
            s.network.set_interlayer(0, 1, row.dx);
            s.detection.eps = eps;
            row.lambda_2 = algebraic_connectivity(scenario_laplacian(s));
            row.t_c = run_scenario(s).t_c;
        } catch (const Error& e) {
            row.failed = true;
            row.t_c.reset();
            row.error = std::string(to_string(e.code())) + ": " + e.what();
        }
    };

    const int workers = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, rows.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < rows.size(); ++k) run_point(k);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < rows.size(); k = next++) run_point(k);
        });
    }
    for (auto& t : pool) t.join();
    return rows;
}

DispatchResult run_dispatch(const Scenario& s) {
    if (s.dynamics.kind != DynamicsKind::Dispatch) throw InvalidModel("scenario is not a dispatch scenario");
    const FlowSystem system = build_flow_system(s);
    DispatchResult r;
    r.trajectory = integrate(system, initial_state(s, system), s.integrator, clamp_projection(s));
    r.trajectory.scenario_id = s.id;

    const auto& cons = std::get<DispatchFlow>(system.kind()).constraints;
    const Vector& q = r.trajectory.final_state().y;
    const Eigen::Vector2d g = cons.residual(q);
    r.power_balance_residual = std::abs(g(0));
    r.gas_balance_residual = std::abs(g(1));
    const int n = s.network.nodes;
    for (int a = 0; a < 3; ++a) {
        const auto seg = q.segment(a * n, n);
        r.per_layer_consensus_residual =
            std::max(r.per_layer_consensus_residual, seg.maxCoeff() - seg.minCoeff());
        r.layer_means.push_back(seg.mean());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

nlohmann::json optional_time(const std::optional<double>& t) {
    if (t) return *t;
    return "not-reached";
}

}  // namespace

std::string run_summary_json(const Scenario& s, const RunResult& r) {
    nlohmann::ordered_json j;
    j["scenario"] = s.id;
    j["dynamics"] = r.trajectory.dynamics;
    j["t_end"] = r.trajectory.final_state().t;
    j["samples"] = r.trajectory.samples.size();
    j["xstar"] = r.xstar;
    j["final_max_error"] = r.final_max_error;
    j["eps"] = s.detection.eps;
    j["t_c"] = optional_time(r.t_c);
    const FlowState& last = r.trajectory.final_state();
    j["consensus_residual"] = consensus_residual(last.y);
    if (last.has_lambda()) j["dual_average"] = dual_average(last);
    return j.dump(2) + "\n";
}

std::string dispatch_summary_json(const Scenario& s, const DispatchResult& r) {
    nlohmann::ordered_json j;
    j["scenario"] = s.id;
    j["dynamics"] = r.trajectory.dynamics;
    j["coupling"] = s.dispatch && s.dispatch->coupling == ConsensusCoupling::Intralayer ? "intralayer" : "supra";
    j["t_end"] = r.trajectory.final_state().t;
    j["power_balance_residual"] = r.power_balance_residual;
    j["gas_balance_residual"] = r.gas_balance_residual;
    j["per_layer_consensus_residual"] = r.per_layer_consensus_residual;
    j["layer_means"] = r.layer_means;
    return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& rows) {
    std::ostringstream os;
    os << "d_x,t_c,lambda_2\n";
    for (const auto& row : rows) {
        os << format_double(row.dx) << ',' << (row.t_c ? format_double(*row.t_c) : "not-reached") << ','
           << format_double(row.lambda_2) << '\n';
    }
    return os.str();
}

}  // namespace supraflow
