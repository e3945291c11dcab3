#include "supraflow/objectives.hpp"

#include "supraflow/errors.hpp"
#include "supraflow/random.hpp"

#include <algorithm>
#include <cmath>

namespace supraflow {

ReplicaCost::ReplicaCost(Quadratic q) : kind_(q) {
    if (!(q.curvature > 0.0) || !std::isfinite(q.curvature) || !std::isfinite(q.linear)) {
        throw InvalidModel("quadratic cost needs finite coefficients and curvature > 0");
    }
}

ReplicaCost::ReplicaCost(CustomSmooth c) : kind_(std::move(c)) {
    const auto& custom = std::get<CustomSmooth>(kind_);
    if (!custom.value || !custom.gradient) {
        throw InvalidModel("custom cost needs both a value and a gradient callable");
    }
    if (!(custom.lipschitz_hint > 0.0)) {
        throw InvalidModel("custom cost needs a positive Lipschitz hint");
    }
}

ReplicaCost ReplicaCost::zero() {
    return ReplicaCost(CustomSmooth{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0});
}

double ReplicaCost::value(double y) const {
    if (const auto* q = std::get_if<Quadratic>(&kind_)) {
        return 0.5 * q->curvature * y * y + q->linear * y;
    }
    return std::get<CustomSmooth>(kind_).value(y);
}

double ReplicaCost::gradient(double y) const {
    if (const auto* q = std::get_if<Quadratic>(&kind_)) {
        return q->curvature * y + q->linear;
    }
    return std::get<CustomSmooth>(kind_).gradient(y);
}

double ReplicaCost::lipschitz_hint() const {
    if (const auto* q = std::get_if<Quadratic>(&kind_)) return q->curvature;
    return std::get<CustomSmooth>(kind_).lipschitz_hint;
}

ObjectiveSet::ObjectiveSet(int n_nodes, int n_layers, std::vector<ReplicaCost> costs)
    : n_nodes_(n_nodes), n_layers_(n_layers), costs_(std::move(costs)) {
    if (n_nodes_ < 1 || n_layers_ < 1) {
        throw InvalidModel("objective set needs at least one node and one layer");
    }
    if (static_cast<int>(costs_.size()) != n_nodes_ * n_layers_) {
        throw InvalidModel("objective set needs exactly one cost per replica node");
    }
}

ObjectiveSet ObjectiveSet::uniform(int n_nodes, int n_layers, const ReplicaCost& cost) {
    std::vector<ReplicaCost> costs(static_cast<std::size_t>(std::max(0, n_nodes * n_layers)), cost);
    return ObjectiveSet(n_nodes, n_layers, std::move(costs));
}

bool ObjectiveSet::all_quadratic() const {
    return std::all_of(costs_.begin(), costs_.end(), [](const ReplicaCost& c) { return c.is_quadratic(); });
}

double ObjectiveSet::lipschitz_bound() const {
    double bound = 0.0;
    for (const auto& c : costs_) bound = std::max(bound, c.lipschitz_hint());
    return bound;
}

double global_value(const ObjectiveSet& obj, double x) {
    double total = 0.0;
    for (const auto& c : obj.costs()) total += c.value(x);
    return total;
}

double stacked_value(const ObjectiveSet& obj, const Vector& y) {
    if (y.size() != obj.dim()) throw InvalidModel("state length must be N*M");
    double total = 0.0;
    for (int k = 0; k < obj.dim(); ++k) total += obj[k].value(y(k));
    return total;
}

void stacked_gradient(const ObjectiveSet& obj, const Vector& y, Vector& out) {
    if (y.size() != obj.dim()) throw InvalidModel("state length must be N*M");
    out.resize(obj.dim());
    for (int k = 0; k < obj.dim(); ++k) out(k) = obj[k].gradient(y(k));
}

Vector stacked_gradient(const ObjectiveSet& obj, const Vector& y) {
    Vector out;
    stacked_gradient(obj, y, out);
    return out;
}

double quadratic_optimum(const ObjectiveSet& obj) {
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (const auto& c : obj.costs()) {
        if (!c.is_quadratic()) {
            throw InvalidModel("closed-form optimum needs every cost to be quadratic");
        }
        sum_a += c.quadratic().curvature;
        sum_b += c.quadratic().linear;
    }
    return -sum_b / sum_a;
}

KktReport check_kkt(const ObjectiveSet& obj, const SupraLaplacian& sl, const Vector& y,
                    const Vector& lambda, double tol) {
    if (y.size() != sl.dim() || lambda.size() != sl.dim() || obj.dim() != sl.dim()) {
        throw InvalidModel("KKT check needs vectors of length N*M");
    }
    const Vector ly = sl.apply(y);
    const Vector stationarity = sl.apply(lambda) + stacked_gradient(obj, y);
    KktReport report{};
    report.consensus_residual = ly.lpNorm<Eigen::Infinity>();
    report.stationarity_residual = stationarity.lpNorm<Eigen::Infinity>();
    report.pass = report.consensus_residual <= tol && report.stationarity_residual <= tol;
    return report;
}

double persistent_gain(double theta, double t) {
    if (!(theta > 0.0)) throw InvalidModel("gain parameter theta must be positive");
    if (!(t >= 0.0)) throw InvalidModel("gain is defined for t >= 0");
    return 1.0 / (theta + t);
}

double sampled_lipschitz(const ReplicaCost& cost, double lo, double hi, int samples,
                         std::uint64_t seed) {
    UniformSampler draw(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double x = draw(lo, hi);
        const double xp = draw(lo, hi);
        if (x == xp) continue;
        worst = std::max(worst, std::abs(cost.gradient(x) - cost.gradient(xp)) / std::abs(x - xp));
    }
    return worst;
}

bool lipschitz_hint_holds(const ReplicaCost& cost, double lo, double hi, int samples,
                          std::uint64_t seed) {
    return sampled_lipschitz(cost, lo, hi, samples, seed) <= cost.lipschitz_hint() * (1.0 + 1e-9);
}

}  // namespace supraflow
