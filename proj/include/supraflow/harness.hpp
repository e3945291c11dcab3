#pragma once

#include "supraflow/dynamics.hpp"
#include "supraflow/graph.hpp"
#include "supraflow/objectives.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace supraflow {

// ---------------------------------------------------------------------------
// Declarative scenario description. Everything here is plain data so a
// scenario can be written out and read back without loss.

enum class Topology { Empty, Ring, Complete, Path, Edges, Weights };

std::string_view to_string(Topology t);
Topology topology_from_string(std::string_view text);

struct EdgeSpec {
    int from;  // 0-based in memory, 1-based in files
    int to;
    double weight = 1.0;
    bool operator==(const EdgeSpec&) const = default;
};

struct LayerSpec {
    Topology topology = Topology::Complete;
    double weight = 1.0;                        // ring / complete / path
    std::vector<EdgeSpec> edges;                // Topology::Edges
    std::vector<std::vector<double>> weights;   // Topology::Weights
    double diffusion = 1.0;                     // D^{[alpha]}

    LayerGraph build(int n_nodes) const;
    bool operator==(const LayerSpec&) const = default;
};

struct InterlayerSpec {
    int first;  // 0-based layer indices
    int second;
    double diffusion;
    bool operator==(const InterlayerSpec&) const = default;
};

struct NetworkSpec {
    int nodes = 1;
    std::vector<LayerSpec> layers;
    std::vector<InterlayerSpec> interlayer;  // unlisted pairs are uncoupled

    MultiplexNetwork build() const;
    /// Sets (or adds) the coupling between two layers.
    void set_interlayer(int first, int second, double diffusion);
    bool operator==(const NetworkSpec&) const = default;
};

enum class ObjectiveGenerator {
    LayeredLinear,  // Quadratic(1, i + N*alpha) with 1-based i, 0-based alpha
    Uniform,        // the same quadratic everywhere
    Zero,
    Explicit,       // one quadratic per replica, layer-major
};

std::string_view to_string(ObjectiveGenerator g);
ObjectiveGenerator objective_generator_from_string(std::string_view text);

struct ObjectiveSpec {
    ObjectiveGenerator generator = ObjectiveGenerator::LayeredLinear;
    Quadratic uniform{1.0, 0.0};
    std::vector<Quadratic> costs;

    ObjectiveSet build(int n_nodes, int n_layers) const;
    bool operator==(const ObjectiveSpec&) const = default;
};

enum class DynamicsKind { Saddle, GradientFlow, Penalty, Dispatch };

std::string_view to_string(DynamicsKind k);
DynamicsKind dynamics_kind_from_string(std::string_view text);

struct DynamicsSpec {
    DynamicsKind kind = DynamicsKind::Saddle;
    double theta = 1.0;
    double rho = 1.0;
    DispatchOrder order = DispatchOrder::First;
    bool operator==(const DynamicsSpec&) const = default;
};

/// Operator that drives consensus in the dispatch flow.
enum class ConsensusCoupling {
    Supra,       // full supra-Laplacian, interlayer terms included
    Intralayer,  // Lambda only: consensus inside each layer
};

struct BoundsSpec {
    double lower;
    double upper;
    bool operator==(const BoundsSpec&) const = default;
};

struct DispatchSpec {
    std::vector<LayerRole> roles{LayerRole::Conventional, LayerRole::GasFired, LayerRole::GasSupply};
    double power_demand = 100.0;
    double gas_demand = 100.0;
    double phi = 0.7;
    ConsensusCoupling coupling = ConsensusCoupling::Supra;
    // Experimental: clamp each layer into [lower, upper] after every step.
    bool clamp = false;
    std::vector<BoundsSpec> bounds;

    DispatchConstraints build(int n_nodes) const;
    bool operator==(const DispatchSpec&) const = default;
};

enum class InitialMode { Zero, Random, Explicit };

struct InitialSpec {
    InitialMode mode = InitialMode::Zero;
    std::optional<std::uint64_t> seed;  // required for Random
    double range = 5.0;                 // Random draws from [-range, range]
    std::vector<double> y;              // Explicit
    std::vector<double> lambda;         // Explicit, optional
    bool operator==(const InitialSpec&) const = default;
};

enum class ReferenceKind { QuadraticOptimum, Explicit };

struct DetectionSpec {
    double eps = 1e-2;
    ReferenceKind reference = ReferenceKind::QuadraticOptimum;
    double xstar = 0.0;
    bool operator==(const DetectionSpec&) const = default;
};

struct Scenario {
    std::string id;
    NetworkSpec network;
    ObjectiveSpec objectives;
    DynamicsSpec dynamics;
    std::optional<DispatchSpec> dispatch;
    IntegratorConfig integrator{0.01, 60.0, 10};
    InitialSpec initial;
    DetectionSpec detection;

    /// Throws InvalidModel naming the first violated invariant.
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------
// Built-in experiments

/// Two layers, three nodes, complete graphs, every diffusion constant 1,
/// layered-linear quadratic costs, saddle dynamics.
Scenario build_vi_a_scenario();

/// Sweep base: ring layer and complete layer on n_nodes, layered-linear costs,
/// saddle dynamics, t_end 200.
Scenario build_vi_b_scenario(int n_nodes = 7);

/// Three chain-coupled layers (conventional ring, gas-fired complete, gas
/// supply ring) of seven generators, unit quadratic costs, P_D = G_D = 100.
Scenario build_dispatch_scenario(DispatchOrder order = DispatchOrder::First);

// ---------------------------------------------------------------------------
// Runners

SupraLaplacian scenario_laplacian(const Scenario& s);
FlowSystem build_flow_system(const Scenario& s);
FlowState initial_state(const Scenario& s, const FlowSystem& system);

/// x* used for error and consensus-time measurements.
double reference_optimum(const Scenario& s);

struct RunResult {
    Trajectory trajectory;
    double xstar = 0.0;
    double final_max_error = 0.0;
    std::optional<double> t_c;
};

/// Integrates a non-dispatch scenario.
RunResult run_scenario(const Scenario& s);

/// Earliest sampled t after which max_k |y_k - x*| <= eps holds at every
/// later sample. nullopt when the final sample is outside the band.
std::optional<double> detect_consensus_time(const Trajectory& traj, double xstar, double eps);

struct SweepRow {
    double dx;
    std::optional<double> t_c;
    double lambda_2;
    bool failed = false;
    std::string error;
};

using SweepResult = std::vector<SweepRow>;

std::vector<double> log_spaced(double lo, double hi, int points);

/// Re-runs base with D^{[1,2]} = dx for every dx (rows keep the input order,
/// which must be ascending). jobs > 1 runs points on worker threads.
SweepResult sweep_interlayer(const Scenario& base, const std::vector<double>& dx_values, double eps,
                             int jobs = 1);

struct DispatchResult {
    Trajectory trajectory;
    double power_balance_residual = 0.0;
    double gas_balance_residual = 0.0;
    double per_layer_consensus_residual = 0.0;  // max over layers of (max - min)
    std::vector<double> layer_means;
};

DispatchResult run_dispatch(const Scenario& s);

// ---------------------------------------------------------------------------
// Artifacts

std::string run_summary_json(const Scenario& s, const RunResult& r);
std::string dispatch_summary_json(const Scenario& s, const DispatchResult& r);
std::string sweep_csv(const SweepResult& rows);

}  // namespace supraflow
