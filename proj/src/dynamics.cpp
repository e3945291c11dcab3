#include "supraflow/dynamics.hpp"

#include "supraflow/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace supraflow {

namespace {

void require_length(const Vector& v, Eigen::Index n, const char* what) {
    if (v.size() != n) {
        std::ostringstream os;
        os << what << " has length " << v.size() << ", expected " << n;
        throw InvalidModel(os.str());
    }
}

void require_same_dim(const SupraLaplacian& sl, const ObjectiveSet& obj) {
    if (sl.dim() != obj.dim()) throw InvalidModel("operator and objectives disagree on N*M");
}

// Second derivative of each replica cost along its own coordinate.
Vector cost_curvature_times(const ObjectiveSet& obj, const Vector& q, const Vector& v) {
    Vector out(q.size());
    for (int k = 0; k < obj.dim(); ++k) {
        const auto& c = obj[k];
        if (c.is_quadratic()) {
            out(k) = c.quadratic().curvature * v(k);
        } else {
            const double eps = 1e-6 * std::max(1.0, std::abs(q(k)));
            out(k) = (c.gradient(q(k) + eps) - c.gradient(q(k) - eps)) / (2.0 * eps) * v(k);
        }
    }
    return out;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidModel("integrator step must be positive");
    if (!(t_end >= step) || !std::isfinite(t_end)) throw InvalidModel("integrator t_end must be >= step");
    if (record_every < 1) throw InvalidModel("record_every must be a positive integer");
}

// ---------------------------------------------------------------------------
// Dispatch constraints

std::string_view to_string(LayerRole role) {
    switch (role) {
        case LayerRole::Conventional: return "conventional";
        case LayerRole::GasFired: return "gas_fired";
        case LayerRole::GasSupply: return "gas_supply";
    }
    return "unknown";
}

LayerRole layer_role_from_string(std::string_view text) {
    if (text == "conventional") return LayerRole::Conventional;
    if (text == "gas_fired") return LayerRole::GasFired;
    if (text == "gas_supply") return LayerRole::GasSupply;
    throw InvalidModel("unknown layer role '" + std::string(text) + "'");
}

DispatchConstraints::DispatchConstraints(int n_nodes, std::vector<LayerRole> roles,
                                         double power_demand, double gas_demand, double phi)
    : n_nodes_(n_nodes),
      roles_(std::move(roles)),
      power_demand_(power_demand),
      gas_demand_(gas_demand),
      phi_(phi) {
    if (n_nodes_ < 1) throw InvalidModel("dispatch needs at least one node per layer");
    if (roles_.size() != 3) throw InvalidModel("dispatch needs exactly three layers");
    std::array<int, 3> count{};
    for (auto r : roles_) ++count[static_cast<std::size_t>(r)];
    if (count != std::array<int, 3>{1, 1, 1}) {
        throw InvalidModel("dispatch needs exactly one layer per role");
    }
    if (!(phi_ > 0.0)) throw InvalidModel("fuel conversion factor must be positive");
    if (!std::isfinite(power_demand_) || !std::isfinite(gas_demand_)) {
        throw InvalidModel("demands must be finite");
    }

    jacobian_ = Matrix::Zero(2, dim());
    for (int alpha = 0; alpha < 3; ++alpha) {
        auto cols = jacobian_.middleCols(alpha * n_nodes_, n_nodes_);
        switch (roles_[static_cast<std::size_t>(alpha)]) {
            case LayerRole::Conventional: cols.row(0).setOnes(); break;
            case LayerRole::GasFired:
                cols.row(0).setOnes();
                cols.row(1).setConstant(-phi_);
                break;
            case LayerRole::GasSupply: cols.row(1).setOnes(); break;
        }
    }
}

int DispatchConstraints::layer_of(LayerRole role) const {
    for (std::size_t a = 0; a < roles_.size(); ++a) {
        if (roles_[a] == role) return static_cast<int>(a);
    }
    return -1;
}

Eigen::Vector2d DispatchConstraints::residual(const Vector& q) const {
    require_length(q, dim(), "dispatch vector");
    return jacobian_ * q - Eigen::Vector2d(power_demand_, gas_demand_);
}

// ---------------------------------------------------------------------------
// Right-hand sides

SaddleDerivative saddle_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, const FlowState& s) {
    require_same_dim(sl, obj);
    require_length(s.y, sl.dim(), "y");
    require_length(s.lambda, sl.dim(), "lambda");
    SaddleDerivative d;
    const Vector ly = sl.apply(s.y);
    d.dy = -stacked_gradient(obj, s.y) - ly - sl.apply(s.lambda);
    d.dlambda = ly;
    return d;
}

SaddleDerivative saddle_rhs_per_agent(const MultiplexNetwork& net, const ObjectiveSet& obj,
                                      const FlowState& s) {
    if (net.dim() != obj.dim()) throw InvalidModel("network and objectives disagree on N*M");
    require_length(s.y, net.dim(), "y");
    require_length(s.lambda, net.dim(), "lambda");

    const int n = net.n_nodes();
    const int m = net.n_layers();
    SaddleDerivative d{Vector(net.dim()), Vector(net.dim())};
    for (int alpha = 0; alpha < m; ++alpha) {
        const LayerGraph& g = net.layer(alpha);
        const double intra = net.intra_diffusion(alpha);
        for (int i = 0; i < n; ++i) {
            const int self = net.index(i, alpha);
            double diff_y = 0.0;
            double diff_lambda = 0.0;
            for (int j = 0; j < n; ++j) {
                const double w = g.weight(i, j);
                if (w == 0.0) continue;
                const int other = net.index(j, alpha);
                diff_y += intra * w * (s.y(other) - s.y(self));
                diff_lambda += intra * w * (s.lambda(other) - s.lambda(self));
            }
            for (int beta = 0; beta < m; ++beta) {
                const double dx = net.inter_diffusion(alpha, beta);
                if (beta == alpha || dx == 0.0) continue;
                const int replica = net.index(i, beta);
                diff_y += dx * (s.y(replica) - s.y(self));
                diff_lambda += dx * (s.lambda(replica) - s.lambda(self));
            }
            d.dy(self) = -obj[self].gradient(s.y(self)) + diff_y + diff_lambda;
            d.dlambda(self) = -diff_y;
        }
    }
    return d;
}

Vector gradient_flow_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, double theta,
                         const FlowState& s) {
    require_same_dim(sl, obj);
    require_length(s.y, sl.dim(), "y");
    const double gain = persistent_gain(theta, s.t);
    return -gain * stacked_gradient(obj, s.y) - sl.apply(s.y);
}

Vector penalty_flow_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj, double rho,
                        const FlowState& s) {
    require_same_dim(sl, obj);
    require_length(s.y, sl.dim(), "y");
    if (!(rho > 0.0)) throw InvalidModel("penalty weight rho must be positive");
    return -stacked_gradient(obj, s.y) - rho * sl.apply(s.y);
}

double penalty_objective(const SupraLaplacian& sl, const ObjectiveSet& obj, double rho,
                         const Vector& y) {
    return stacked_value(obj, y) + 0.5 * rho * y.dot(sl.apply(y));
}

DispatchDerivative dispatch_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj,
                                const DispatchConstraints& cons, const FlowState& s) {
    require_same_dim(sl, obj);
    if (cons.dim() != sl.dim()) throw InvalidModel("constraints and operator disagree on N*M");
    require_length(s.y, sl.dim(), "q");
    require_length(s.lambda, sl.dim(), "lambda");
    require_length(s.mu, 2, "mu");
    DispatchDerivative d;
    const Vector lq = sl.apply(s.y);
    d.dq = -stacked_gradient(obj, s.y) - lq - sl.apply(s.lambda) -
           cons.jacobian().transpose() * s.mu;
    d.dlambda = lq;
    d.dmu = cons.residual(s.y);
    return d;
}

SecondOrderDerivative dispatch_second_order_rhs(const SupraLaplacian& sl, const ObjectiveSet& obj,
                                                const DispatchConstraints& cons,
                                                const FlowState& s) {
    require_same_dim(sl, obj);
    if (cons.dim() != sl.dim()) throw InvalidModel("constraints and operator disagree on N*M");
    require_length(s.y, sl.dim(), "q");
    require_length(s.v, sl.dim(), "v");
    SecondOrderDerivative d;
    d.dq = s.v;
    // Unit-curvature costs give the (I + L) damping; general costs use their curvature.
    d.dv = -cost_curvature_times(obj, s.y, s.v) - sl.apply(s.v) - sl.apply(sl.apply(s.y)) -
           cons.jacobian().transpose() * cons.residual(s.y);
    return d;
}

// ---------------------------------------------------------------------------
// Flow systems

std::string flow_name(const FlowKind& kind) {
    struct Visitor {
        std::string operator()(const SaddleFlow&) const { return "saddle"; }
        std::string operator()(const GradientFlow&) const { return "gradient_flow"; }
        std::string operator()(const PenaltyFlow&) const { return "penalty"; }
        std::string operator()(const DispatchFlow& d) const {
            return d.order == DispatchOrder::First ? "dispatch_first_order" : "dispatch_second_order";
        }
    };
    return std::visit(Visitor{}, kind);
}

Vector StateLayout::pack(const FlowState& s) const {
    check(s);
    Vector z(packed_size());
    Eigen::Index at = 0;
    z.segment(at, dim) = s.y;
    at += dim;
    if (lambda) {
        z.segment(at, dim) = s.lambda;
        at += dim;
    }
    if (mu > 0) {
        z.segment(at, mu) = s.mu;
        at += mu;
    }
    if (v) z.segment(at, dim) = s.v;
    return z;
}

FlowState StateLayout::unpack(double t, const Vector& z) const {
    require_length(z, packed_size(), "packed state");
    FlowState s;
    s.t = t;
    Eigen::Index at = 0;
    s.y = z.segment(at, dim);
    at += dim;
    if (lambda) {
        s.lambda = z.segment(at, dim);
        at += dim;
    }
    if (mu > 0) {
        s.mu = z.segment(at, mu);
        at += mu;
    }
    if (v) s.v = z.segment(at, dim);
    return s;
}

void StateLayout::check(const FlowState& s) const {
    require_length(s.y, dim, "y");
    require_length(s.lambda, lambda ? dim : 0, "lambda");
    require_length(s.mu, mu, "mu");
    require_length(s.v, v ? dim : 0, "v");
}

FlowSystem::FlowSystem(SupraLaplacian sl, ObjectiveSet obj, FlowKind kind)
    : sl_(std::move(sl)), obj_(std::move(obj)), kind_(std::move(kind)) {
    require_same_dim(sl_, obj_);
    layout_.dim = sl_.dim();
    if (std::holds_alternative<SaddleFlow>(kind_)) {
        layout_.lambda = true;
    } else if (const auto* g = std::get_if<GradientFlow>(&kind_)) {
        if (!(g->theta > 0.0)) throw InvalidModel("gain parameter theta must be positive");
    } else if (const auto* p = std::get_if<PenaltyFlow>(&kind_)) {
        if (!(p->rho > 0.0)) throw InvalidModel("penalty weight rho must be positive");
    } else {
        const auto& d = std::get<DispatchFlow>(kind_);
        if (d.constraints.dim() != sl_.dim()) {
            throw InvalidModel("constraints and operator disagree on N*M");
        }
        if (d.order == DispatchOrder::First) {
            layout_.lambda = true;
            layout_.mu = 2;
        } else {
            layout_.v = true;
        }
    }
}

FlowState FlowSystem::zero_state() const {
    return layout_.unpack(0.0, Vector::Zero(layout_.packed_size()));
}

FlowState FlowSystem::derivative(const FlowState& s) const {
    Vector dz(layout_.packed_size());
    derivative(s.t, layout_.pack(s), dz);
    return layout_.unpack(s.t, dz);
}

void FlowSystem::derivative(double t, const Vector& z, Vector& dz) const {
    const FlowState s = layout_.unpack(t, z);
    const int n = layout_.dim;
    dz.resize(layout_.packed_size());
    if (std::holds_alternative<SaddleFlow>(kind_)) {
        auto d = saddle_rhs(sl_, obj_, s);
        dz.head(n) = d.dy;
        dz.segment(n, n) = d.dlambda;
    } else if (const auto* g = std::get_if<GradientFlow>(&kind_)) {
        dz = gradient_flow_rhs(sl_, obj_, g->theta, s);
    } else if (const auto* p = std::get_if<PenaltyFlow>(&kind_)) {
        dz = penalty_flow_rhs(sl_, obj_, p->rho, s);
    } else {
        const auto& disp = std::get<DispatchFlow>(kind_);
        if (disp.order == DispatchOrder::First) {
            auto d = dispatch_rhs(sl_, obj_, disp.constraints, s);
            dz.head(n) = d.dq;
            dz.segment(n, n) = d.dlambda;
            dz.tail(2) = d.dmu;
        } else {
            auto d = dispatch_second_order_rhs(sl_, obj_, disp.constraints, s);
            dz.head(n) = d.dq;
            dz.tail(n) = d.dv;
        }
    }
}

// ---------------------------------------------------------------------------
// Integration

Trajectory integrate(const FlowSystem& system, const FlowState& s0, const IntegratorConfig& cfg,
                     const StateProjection& projection) {
    cfg.validate();
    const StateLayout& layout = system.layout();
    layout.check(s0);
    if (!(cfg.t_end > s0.t)) throw InvalidModel("t_end must be after the initial time");

    Trajectory traj;
    traj.dynamics = flow_name(system.kind());
    traj.config = cfg;

    const double t0 = s0.t;
    const double span = cfg.t_end - t0;
    // Tolerate t_end values that are an integer number of steps up to rounding.
    const auto n_steps = static_cast<long long>(std::ceil(span / cfg.step - 1e-9));

    auto rhs = [&system](double t, const Vector& z, Vector& dz) { system.derivative(t, z, dz); };

    Vector z = layout.pack(s0);
    traj.samples.push_back(s0);
    for (long long k = 1; k <= n_steps; ++k) {
        const double t_prev = t0 + static_cast<double>(k - 1) * cfg.step;
        const double t_next = (k == n_steps) ? cfg.t_end : t0 + static_cast<double>(k) * cfg.step;
        z = rk4_step(rhs, t_prev, z, t_next - t_prev);
        if (projection) {
            FlowState projected = layout.unpack(t_next, z);
            projection(projected);
            z = layout.pack(projected);
        }
        if (!z.allFinite()) {
            std::ostringstream os;
            os << "state became non-finite at t=" << format_double(t_next);
            throw DivergenceError(t_next, os.str());
        }
        if (k % cfg.record_every == 0 || k == n_steps) {
            traj.samples.push_back(layout.unpack(t_next, z));
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Diagnostics

double lyapunov_saddle(const FlowState& s, const Vector& ystar, const Vector& lambdastar) {
    require_length(ystar, s.y.size(), "y*");
    require_length(lambdastar, s.lambda.size(), "lambda*");
    return 0.5 * (s.y - ystar).squaredNorm() + 0.5 * (s.lambda - lambdastar).squaredNorm();
}

double dual_average(const FlowState& s) {
    if (!s.has_lambda()) throw InvalidModel("state carries no dual vector");
    return s.lambda.mean();
}

double primal_average(const FlowState& s) { return s.y.mean(); }

double consensus_residual(const Vector& y) {
    return (y.array() - y.mean()).matrix().norm();
}

Vector reference_dual(const SupraLaplacian& sl, const ObjectiveSet& obj, double xstar,
                      double offset) {
    const auto eig = symmetric_eigen(sl.entries());
    const Vector rhs = -stacked_gradient(obj, Vector::Constant(sl.dim(), xstar));
    const double top = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
    const double cutoff = 1e-9 * std::max(top, 1e-300);
    Vector lambda = Vector::Constant(sl.dim(), offset);
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        if (eig.values[k] <= cutoff) continue;
        const auto col = eig.vectors.col(static_cast<Eigen::Index>(k));
        lambda += (col.dot(rhs) / eig.values[k]) * col;
    }
    return lambda;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int n_nodes) {
    if (traj.samples.empty()) return;
    const FlowState& first = traj.samples.front();
    const auto dim = first.y.size();
    if (n_nodes < 1 || dim % n_nodes != 0) throw InvalidModel("CSV node count does not divide state");

    auto replica_columns = [&](const char* prefix) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            os << ',' << prefix << '_' << (k % n_nodes) + 1 << '_' << (k / n_nodes) + 1;
        }
    };
    os << 't';
    replica_columns("y");
    if (first.has_lambda()) replica_columns("lambda");
    for (Eigen::Index k = 0; k < first.mu.size(); ++k) os << ",mu_" << k + 1;
    if (first.has_v()) replica_columns("v");
    os << '\n';

    auto values = [&os](const Vector& v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) os << ',' << format_double(v(k));
    };
    for (const auto& s : traj.samples) {
        os << format_double(s.t);
        values(s.y);
        values(s.lambda);
        values(s.mu);
        values(s.v);
        os << '\n';
    }
}

}  // namespace supraflow
