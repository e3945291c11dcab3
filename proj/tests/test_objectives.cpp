#include "supraflow/dynamics.hpp"
#include "supraflow/errors.hpp"
#include "supraflow/objectives.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/QR>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

using namespace supraflow;
using supraflow::testing::layered_linear_3x2;
using supraflow::testing::random_connected_network;
using supraflow::testing::random_quadratics;
using supraflow::testing::random_vector;

namespace {

// Minimum-norm solution of L lambda = -grad f(x* 1) via complete orthogonal
// decomposition; independent of the library's eigen-based reference_dual.
Vector least_squares_dual(const SupraLaplacian& sl, const ObjectiveSet& obj, double xstar) {
    const Vector g = stacked_gradient(obj, Vector::Constant(sl.dim(), xstar));
    return sl.entries().completeOrthogonalDecomposition().solve(-g);
}

ReplicaCost logcosh_cost() {
    return ReplicaCost(CustomSmooth{[](double y) { return std::log(std::cosh(y)); },
                                    [](double y) { return std::tanh(y); }, 1.0});
}

}  // namespace

TEST_CASE("global value of the small worked example") {
    const ObjectiveSet obj = layered_linear_3x2();
    CHECK(global_value(obj, 0.0) == 0.0);
    CHECK(global_value(obj, 1.0) == doctest::Approx(24.0));
    CHECK(ReplicaCost(Quadratic{1, 0}).value(2.0) == 2.0);
    // Direct summation oracle at an arbitrary point.
    const double x = -1.7;
    double sum = 0.0;
    for (int b = 1; b <= 6; ++b) sum += 0.5 * x * x + b * x;
    CHECK(global_value(obj, x) == doctest::Approx(sum));
    CHECK(stacked_value(obj, Vector::Constant(6, x)) == doctest::Approx(sum));
}

TEST_CASE("stacked gradient") {
    const ObjectiveSet obj = layered_linear_3x2();
    const Vector g = stacked_gradient(obj, Vector::Zero(6));
    for (int k = 0; k < 6; ++k) CHECK(g(k) == k + 1);
    // Layer-major ordering: replica (node 1, layer 1) is entry 4.
    CHECK(obj.at(1, 1).quadratic().linear == 5.0);

    UniformSampler draw(3);
    const ObjectiveSet q = random_quadratics(draw, 4, 3);
    const double x = 0.8;
    const Vector gq = stacked_gradient(q, Vector::Constant(12, x));
    for (int k = 0; k < 12; ++k) {
        CHECK(gq(k) == doctest::Approx(q[k].quadratic().curvature * x + q[k].quadratic().linear));
    }
    CHECK_THROWS_AS(stacked_gradient(obj, Vector::Zero(5)), InvalidModel);
}

TEST_CASE("custom cost gradient matches a central difference") {
    const ReplicaCost c = logcosh_cost();
    const double h = 1e-5;
    for (double y : {-3.0, -0.4, 0.0, 0.9, 2.5}) {
        const double fd = (c.value(y + h) - c.value(y - h)) / (2 * h);
        CHECK(std::abs(fd - c.gradient(y)) < 1e-5);
    }
}

TEST_CASE("closed-form optimum") {
    CHECK(quadratic_optimum(layered_linear_3x2()) == doctest::Approx(-3.5));
    CHECK(quadratic_optimum(ObjectiveSet::uniform(1, 1, Quadratic{1, 0})) == 0.0);
    CHECK(quadratic_optimum(ObjectiveSet(2, 1, {Quadratic{1, 1}, Quadratic{1, -1}})) == 0.0);
    CHECK_THROWS_AS(quadratic_optimum(ObjectiveSet::uniform(2, 1, ReplicaCost::zero())), InvalidModel);

    // Stationarity of the summed objective at x*, random instances.
    UniformSampler draw(17);
    for (int trial = 0; trial < 50; ++trial) {
        const ObjectiveSet obj = random_quadratics(draw, draw.integer(1, 6), draw.integer(1, 3));
        const double x = quadratic_optimum(obj);
        const double slope = stacked_gradient(obj, Vector::Constant(obj.dim(), x)).sum();
        CHECK(std::abs(slope) < 1e-10);
        // And it is a minimum of the global value.
        CHECK(global_value(obj, x) <= global_value(obj, x + 1e-3));
        CHECK(global_value(obj, x) <= global_value(obj, x - 1e-3));
    }
}

TEST_CASE("invalid costs are rejected") {
    CHECK_THROWS_AS(ReplicaCost(Quadratic{0.0, 1.0}), InvalidModel);
    CHECK_THROWS_AS(ReplicaCost(Quadratic{-1.0, 1.0}), InvalidModel);
    CHECK_THROWS_AS(ReplicaCost(Quadratic{1.0, std::nan("")}), InvalidModel);
    CHECK_THROWS_AS(ReplicaCost(CustomSmooth{{}, [](double) { return 0.0; }, 1.0}), InvalidModel);
    CHECK_THROWS_AS(ReplicaCost(CustomSmooth{[](double) { return 0.0; }, [](double) { return 0.0; }, 0.0}),
                    InvalidModel);
    CHECK_THROWS_AS(ObjectiveSet(2, 2, {Quadratic{1, 0}}), InvalidModel);
}

TEST_CASE("KKT check against a least-squares dual") {
    const ObjectiveSet obj = layered_linear_3x2();
    const SupraLaplacian sl = supra_laplacian(
        MultiplexNetwork::uniform({LayerGraph::complete(3), LayerGraph::complete(3)}, {1, 1}, 1.0));
    const double xstar = quadratic_optimum(obj);
    const Vector y = Vector::Constant(6, xstar);
    const Vector lambda = least_squares_dual(sl, obj, xstar);

    const KktReport ok = check_kkt(obj, sl, y, lambda, 1e-6);
    CHECK(ok.pass);
    CHECK(ok.consensus_residual < 1e-12);
    CHECK(ok.stationarity_residual < 1e-10);

    // Shift invariance along the null space.
    const KktReport shifted = check_kkt(obj, sl, y, (lambda.array() + 4.2).matrix(), 1e-6);
    CHECK(shifted.consensus_residual == doctest::Approx(ok.consensus_residual).epsilon(1e-9).scale(1e-12));
    CHECK(shifted.stationarity_residual < 1e-10);
    CHECK(shifted.pass);

    // Non-consensus primal.
    Vector bent = y;
    bent(2) += 0.3;
    const KktReport bad = check_kkt(obj, sl, bent, lambda, 1e-6);
    CHECK(bad.consensus_residual > 0.1);
    CHECK_FALSE(bad.pass);

    // Wrong consensus value: the dual cannot absorb a nonzero total gradient.
    const Vector off = Vector::Constant(6, xstar + 0.1);
    CHECK_FALSE(check_kkt(obj, sl, off, least_squares_dual(sl, obj, xstar + 0.1), 1e-6).pass);
}

TEST_CASE("property: KKT points on random connected networks") {
    UniformSampler draw(2027);
    for (int trial = 0; trial < 40; ++trial) {
        const MultiplexNetwork net = random_connected_network(draw, 6, 3);
        const SupraLaplacian sl = supra_laplacian(net);
        const ObjectiveSet obj = random_quadratics(draw, net.n_nodes(), net.n_layers());
        const double xstar = quadratic_optimum(obj);
        const Vector lambda = least_squares_dual(sl, obj, xstar);
        CHECK(check_kkt(obj, sl, Vector::Constant(sl.dim(), xstar), lambda, 1e-8).pass);

        Vector y = random_vector(draw, sl.dim());
        if (consensus_residual(y) > 1e-3) {
            CHECK(check_kkt(obj, sl, y, lambda, 1e-8).consensus_residual > 0.0);
        }
    }
}

TEST_CASE("persistent gain") {
    CHECK(persistent_gain(1.0, 0.0) == 1.0);
    CHECK(persistent_gain(10.0, 90.0) == doctest::Approx(0.01));
    CHECK_THROWS_AS(persistent_gain(0.0, 1.0), InvalidModel);
    CHECK_THROWS_AS(persistent_gain(1.0, -1.0), InvalidModel);

    using boost::math::quadrature::gauss_kronrod;
    for (double theta : {0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0}) {
        const double upper = theta * (std::exp(1.0) - 1.0);
        const double integral =
            gauss_kronrod<double, 61>::integrate([theta](double t) { return persistent_gain(theta, t); }, 0.0, upper, 15,
                                                 1e-12);
        CHECK(std::abs(integral - 1.0) < 1e-6);
    }
}

TEST_CASE("convexity and first-order under-estimation") {
    UniformSampler draw(11);
    const ReplicaCost costs[] = {Quadratic{0.7, -2.0}, Quadratic{2.0, 3.0}, logcosh_cost()};
    for (const auto& c : costs) {
        for (int s = 0; s < 200; ++s) {
            const double x = draw(-6, 6);
            const double z = draw(-6, 6);
            const double t = draw(0, 1);
            CHECK(c.value(t * x + (1 - t) * z) <= t * c.value(x) + (1 - t) * c.value(z) + 1e-12);
            CHECK(c.value(z) >= c.value(x) + c.gradient(x) * (z - x) - 1e-12);
        }
    }
}

TEST_CASE("Lipschitz hints") {
    const ReplicaCost q(Quadratic{1.5, 2.0});
    CHECK(q.lipschitz_hint() == 1.5);
    CHECK(sampled_lipschitz(q, -10, 10, 500, 1) == doctest::Approx(1.5));
    CHECK(lipschitz_hint_holds(q, -10, 10, 500, 1));
    CHECK(lipschitz_hint_holds(logcosh_cost(), -5, 5, 500, 2));

    // Hint deliberately too small for a steeper gradient.
    const ReplicaCost liar(CustomSmooth{[](double y) { return y * y; }, [](double y) { return 2 * y; }, 1.0});
    CHECK_FALSE(lipschitz_hint_holds(liar, -1, 1, 100, 3));

    const ObjectiveSet obj(2, 1, {Quadratic{0.5, 0}, Quadratic{3.0, 0}});
    CHECK(obj.lipschitz_bound() == 3.0);
    CHECK(obj.all_quadratic());
    CHECK_FALSE(ObjectiveSet::uniform(2, 1, ReplicaCost::zero()).all_quadratic());
}
