#pragma once

#include "supraflow/graph.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace supraflow {

/// value(y) = a y^2 / 2 + b y, a > 0
struct Quadratic {
    double curvature;
    double linear;

    bool operator==(const Quadratic&) const = default;
};

/// Arbitrary smooth convex cost. lipschitz_hint bounds the gradient's
/// Lipschitz constant and is checked by sampling, never derived.
struct CustomSmooth {
    std::function<double(double)> value;
    std::function<double(double)> gradient;
    double lipschitz_hint;
};

/// Cost owned by a single replica node.
class ReplicaCost {
public:
    ReplicaCost(Quadratic q);
    ReplicaCost(CustomSmooth c);

    static ReplicaCost zero();

    double value(double y) const;
    double gradient(double y) const;
    double lipschitz_hint() const;

    bool is_quadratic() const { return std::holds_alternative<Quadratic>(kind_); }
    const Quadratic& quadratic() const { return std::get<Quadratic>(kind_); }

private:
    std::variant<Quadratic, CustomSmooth> kind_;
};

/// One cost per replica, layer-major like every other stacked vector.
class ObjectiveSet {
public:
    ObjectiveSet(int n_nodes, int n_layers, std::vector<ReplicaCost> costs);

    /// Same cost at every replica.
    static ObjectiveSet uniform(int n_nodes, int n_layers, const ReplicaCost& cost);

    int n_nodes() const { return n_nodes_; }
    int n_layers() const { return n_layers_; }
    int dim() const { return n_nodes_ * n_layers_; }
    const ReplicaCost& at(int node, int layer) const { return costs_.at(static_cast<std::size_t>(layer * n_nodes_ + node)); }
    const ReplicaCost& operator[](int k) const { return costs_.at(static_cast<std::size_t>(k)); }
    const std::vector<ReplicaCost>& costs() const { return costs_; }

    bool all_quadratic() const;

    /// Largest per-replica Lipschitz hint.
    double lipschitz_bound() const;

private:
    int n_nodes_;
    int n_layers_;
    std::vector<ReplicaCost> costs_;
};

/// f(x) = sum over all replicas of f_i^{[alpha]}(x)
double global_value(const ObjectiveSet& obj, double x);

/// sum_k f_k(y_k)
double stacked_value(const ObjectiveSet& obj, const Vector& y);

/// Component k is grad f_k(y_k); purely local.
Vector stacked_gradient(const ObjectiveSet& obj, const Vector& y);
void stacked_gradient(const ObjectiveSet& obj, const Vector& y, Vector& out);

/// x* = -(sum b) / (sum a). Throws InvalidModel unless every cost is Quadratic.
double quadratic_optimum(const ObjectiveSet& obj);

struct KktReport {
    double consensus_residual;     // |L y|_inf
    double stationarity_residual;  // |L lambda + grad f(y)|_inf
    bool pass;
};

KktReport check_kkt(const ObjectiveSet& obj, const SupraLaplacian& sl, const Vector& y,
                    const Vector& lambda, double tol);

/// 1 / (theta + t). Throws InvalidModel for theta <= 0 or t < 0.
double persistent_gain(double theta, double t);

/// Largest observed |g(x) - g(x')| / |x - x'| over seeded samples in [lo, hi].
double sampled_lipschitz(const ReplicaCost& cost, double lo, double hi, int samples,
                         std::uint64_t seed);

/// True when the sampled ratio never exceeds the cost's hint (with relative slack).
bool lipschitz_hint_holds(const ReplicaCost& cost, double lo, double hi, int samples,
                          std::uint64_t seed);

}  // namespace supraflow
