#pragma once

#include "supraflow/graph.hpp"
#include "supraflow/objectives.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace supraflow {

/// Trajectory state. Optional parts (lambda, mu, v) are size-0 when absent.
/// y doubles as the dispatch vector q.
struct FlowState {
    double t = 0.0;
    Vector y;
    Vector lambda;
    Vector mu;
    Vector v;

    bool has_lambda() const { return lambda.size() > 0; }
    bool has_mu() const { return mu.size() > 0; }
    bool has_v() const { return v.size() > 0; }

    /// Number of scalar components (excluding t).
    Eigen::Index size() const { return y.size() + lambda.size() + mu.size() + v.size(); }
};

struct IntegratorConfig {
    double step = 0.01;
    double t_end = 1.0;
    int record_every = 1;

    void validate() const;
    bool operator==(const IntegratorConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Dispatch constraints

enum class LayerRole { Conventional, GasFired, GasSupply };

std::string_view to_string(LayerRole role);
LayerRole layer_role_from_string(std::string_view text);

/// Power balance sum p_T + sum p_K = P_D and gas balance
/// sum g_G - phi sum p_K = G_D over a three-layer multiplex.
class DispatchConstraints {
public:
    DispatchConstraints(int n_nodes, std::vector<LayerRole> roles, double power_demand,
                        double gas_demand, double phi);

    int n_nodes() const { return n_nodes_; }
    int dim() const { return n_nodes_ * static_cast<int>(roles_.size()); }
    const std::vector<LayerRole>& roles() const { return roles_; }
    double power_demand() const { return power_demand_; }
    double gas_demand() const { return gas_demand_; }
    double phi() const { return phi_; }
    int layer_of(LayerRole role) const;

    /// 2 x dim matrix dg/dq.
    const Matrix& jacobian() const { return jacobian_; }

    /// g(q) = jacobian * q - (P_D, G_D)
    Eigen::Vector2d residual(const Vector& q) const;

private:
    int n_nodes_;
    std::vector<LayerRole> roles_;
    double power_demand_;
    double gas_demand_;
    double phi_;
    Matrix jacobian_;
};

// ---------------------------------------------------------------------------
// Right-hand sides

struct SaddleDerivative {
    Vector dy;
    Vector dlambda;
};

struct DispatchDerivative {
    Vector dq;
    Vector dlambda;
    Eigen::Vector2d dmu;
};

struct SecondOrderDerivative {
    Vector dq;
    Vector dv;
};

/// dy = -grad f(y) - L y - L lambda, dlambda = L y
SaddleDerivative saddle_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, const FlowState& s);

/// Same flow evaluated replica by replica from intralayer neighbours and own
/// replicas in other layers only.
SaddleDerivative saddle_rhs_per_agent(const MultiplexNetwork& net, const ObjectiveSet& obj,
                                      const FlowState& s);

/// dy = -sigma(t, theta) grad f(y) - L y
Vector gradient_flow_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, double theta,
                         const FlowState& s);

/// dy = -grad f(y) - rho L y  (K1 = I)
Vector penalty_flow_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, double rho,
                        const FlowState& s);

/// f(y) + rho/2 y^T L y
double penalty_objective(const SupraLaplacian& sl, const ObjectiveSet& obj, double rho,
                         const Vector& y);

/// dq = -grad C(q) - L q - L lambda - J^T mu, dlambda = L q, dmu = g(q)
DispatchDerivative dispatch_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj,
                                const DispatchConstraints& cons, const FlowState& s);

/// dq = v, dv = -(H + L) v - L^2 q - J^T g(q), H the diagonal cost curvature
/// (identity for unit quadratics; central differences for custom costs).
SecondOrderDerivative dispatch_second_order_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj,
                                                const DispatchConstraints& cons,
                                                const FlowState& s);

// ---------------------------------------------------------------------------
// Flow systems

struct SaddleFlow {};
struct GradientFlow {
    double theta;
};
struct PenaltyFlow {
    double rho;
};
enum class DispatchOrder { First, Second };
struct DispatchFlow {
    DispatchConstraints constraints;
    DispatchOrder order = DispatchOrder::First;
};

using FlowKind = std::variant<SaddleFlow, GradientFlow, PenaltyFlow, DispatchFlow>;

std::string flow_name(const FlowKind& kind);

/// Which parts of FlowState a flow kind carries.
struct StateLayout {
    int dim = 0;  // N*M
    bool lambda = false;
    int mu = 0;
    bool v = false;

    Eigen::Index packed_size() const { return dim * (1 + lambda + v) + mu; }
    Vector pack(const FlowState& s) const;
    FlowState unpack(double t, const Vector& z) const;
    void check(const FlowState& s) const;
};

/// A bound (operator, objectives, flow kind) triple exposing a packed RHS.
class FlowSystem {
public:
    FlowSystem(SupraLaplacian sl, ObjectiveSet obj, FlowKind kind);

    const SupraLaplacian& laplacian() const { return sl_; }
    const ObjectiveSet& objectives() const { return obj_; }
    const FlowKind& kind() const { return kind_; }
    const StateLayout& layout() const { return layout_; }

    /// Initial state with every present part set to zero.
    FlowState zero_state() const;

    FlowState derivative(const FlowState& s) const;
    void derivative(double t, const Vector& z, Vector& dz) const;

private:
    SupraLaplacian sl_;
    ObjectiveSet obj_;
    FlowKind kind_;
    StateLayout layout_;
};

// ---------------------------------------------------------------------------
// Integration

struct Trajectory {
    std::string scenario_id;
    std::string dynamics;
    IntegratorConfig config;
    std::vector<FlowState> samples;

    const FlowState& final_state() const { return samples.back(); }
};

/// Applied to the state after every accepted step.
using StateProjection = std::function<void(FlowState&)>;

/// One classical RK4 step for z' = f(t, z).
template <class Rhs>
Vector rk4_step(const Rhs& f, double t, const Vector& z, double h) {
    Vector k1(z.size()), k2(z.size()), k3(z.size()), k4(z.size());
    f(t, z, k1);
    f(t + 0.5 * h, z + 0.5 * h * k1, k2);
    f(t + 0.5 * h, z + 0.5 * h * k2, k3);
    f(t + h, z + h * k3, k4);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from s0.t to cfg.t_end; samples every record_every steps
/// plus the final time. Throws DivergenceError on a non-finite state.
Trajectory integrate(const FlowSystem& system, const FlowState& s0, const IntegratorConfig& cfg,
                     const StateProjection& projection = {});

// ---------------------------------------------------------------------------
// Diagnostics

/// 1/2 |y - y*|^2 + 1/2 |lambda - lambda*|^2
double lyapunov_saddle(const FlowState& s, const Vector& ystar, const Vector& lambdastar);

double dual_average(const FlowState& s);

/// Consensus coordinate: mean of y.
double primal_average(const FlowState& s);

/// |y - mean(y) 1|_2
double consensus_residual(const Vector& y);

/// Minimum-norm lambda with L lambda = -grad f(x* 1), shifted by offset * 1.
/// Built from the eigendecomposition of L; requires a connected operator.
Vector reference_dual(const SupraLaplacian& sl, const ObjectiveSet& obj, double xstar,
                      double offset = 0.0);

// ---------------------------------------------------------------------------
// CSV

/// Header: t, y_i_alpha (layer-major), lambda_i_alpha, mu_k, v_i_alpha.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int n_nodes);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace supraflow
