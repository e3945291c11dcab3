#include "supraflow/errors.hpp"
#include "supraflow/harness.hpp"

#include <doctest.h>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace supraflow;

namespace {

Trajectory synthetic(const std::vector<std::pair<double, double>>& points) {
    Trajectory traj;
    for (const auto& [t, y] : points) {
        FlowState s;
        s.t = t;
        s.y = Vector::Constant(2, y);
        traj.samples.push_back(s);
    }
    return traj;
}

Scenario short_vi_b(int points_t_end = 60) {
    Scenario s = build_vi_b_scenario(5);
    s.integrator.t_end = points_t_end;
    return s;
}

}  // namespace

TEST_CASE("small worked example builder") {
    const Scenario s = build_vi_a_scenario();
    CHECK_NOTHROW(s.validate());
    const MultiplexNetwork net = s.network.build();
    CHECK(net.n_nodes() == 3);
    CHECK(net.n_layers() == 2);
    CHECK(is_connected(net));
    const SupraLaplacian sl = scenario_laplacian(s);
    CHECK(sl.dim() == 6);
    CHECK(sl.entries() == sl.entries().transpose());
    CHECK(sl.entries().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(reference_optimum(s) == doctest::Approx(-3.5));

    const ObjectiveSet obj = s.objectives.build(3, 2);
    for (int k = 0; k < 6; ++k) CHECK(obj[k].quadratic().linear == k + 1);
}

TEST_CASE("small worked example converges") {
    const RunResult r = run_scenario(build_vi_a_scenario());
    CHECK(r.xstar == doctest::Approx(-3.5));
    CHECK(r.final_max_error < 1e-3);
    REQUIRE(r.t_c.has_value());
    CHECK(*r.t_c < 30.0);
    CHECK(r.trajectory.final_state().t == 60.0);
    CHECK(r.trajectory.dynamics == "saddle");
}

TEST_CASE("doubling every diffusion constant shortens the consensus time") {
    // The replica mean obeys m' = -(m + 3.5) whatever the diffusion, so from a
    // zero start t_c >= ln(3.5 / eps). Diffusion only trims the disagreement
    // on top of that, a few hundredths of time: sample every step to see it.
    Scenario s = build_vi_a_scenario();
    s.integrator.record_every = 1;
    const RunResult base = run_scenario(s);
    for (auto& layer : s.network.layers) layer.diffusion *= 2.0;
    for (auto& link : s.network.interlayer) link.diffusion *= 2.0;
    const RunResult fast = run_scenario(s);
    REQUIRE(base.t_c);
    REQUIRE(fast.t_c);
    CHECK(*fast.t_c < *base.t_c);
    CHECK(*fast.t_c >= std::log(3.5 / 1e-2) - 0.01);
}

TEST_CASE("zero objectives from a consensus start stay put") {
    Scenario s = build_vi_a_scenario();
    s.objectives.generator = ObjectiveGenerator::Zero;
    s.detection.reference = ReferenceKind::Explicit;
    s.detection.xstar = 1.5;
    s.initial.mode = InitialMode::Explicit;
    s.initial.y = std::vector<double>(6, 1.5);
    s.integrator.t_end = 5.0;
    const RunResult r = run_scenario(s);
    for (const auto& st : r.trajectory.samples) {
        CHECK((st.y.array() == 1.5).all());
        CHECK(st.lambda.isZero());
    }
    CHECK(r.t_c == 0.0);
}

TEST_CASE("consensus time detector") {
    CHECK(detect_consensus_time(synthetic({{0, 2}, {1, 2}, {2, 2}}), 2.0, 1e-2) == 0.0);
    CHECK_FALSE(detect_consensus_time(synthetic({{0, 2}, {1, 2}, {2, 3}}), 2.0, 1e-2).has_value());
    // Leaves the band and comes back: only the final entry counts.
    CHECK(detect_consensus_time(synthetic({{0, 0}, {1, 2}, {2, 5}, {3, 2.001}, {4, 2}}), 2.0, 1e-2) == 3.0);
    CHECK_FALSE(detect_consensus_time(Trajectory{}, 0.0, 1.0).has_value());
}

TEST_CASE("property: larger eps never yields a later consensus time") {
    const RunResult r = run_scenario(build_vi_a_scenario());
    std::optional<double> prev;
    bool first = true;
    for (double eps : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        const auto t = detect_consensus_time(r.trajectory, r.xstar, eps);
        if (!first && prev) {
            REQUIRE(t.has_value());
            CHECK(*t <= *prev);
        }
        prev = t;
        first = false;
    }
}

TEST_CASE("gradient and penalty dynamics run through the harness") {
    Scenario g = build_vi_a_scenario();
    g.dynamics.kind = DynamicsKind::GradientFlow;
    g.dynamics.theta = 1.0;
    g.integrator.t_end = 20.0;
    const RunResult gr = run_scenario(g);
    CHECK(gr.trajectory.dynamics == "gradient_flow");
    CHECK_FALSE(gr.trajectory.final_state().has_lambda());
    // Consensus mean obeys m + 3.5 = (m0 + 3.5) theta / (theta + t) exactly.
    CHECK(gr.trajectory.final_state().y.mean() + 3.5 == doctest::Approx(3.5 * 1.0 / 21.0).epsilon(1e-6));

    Scenario p = build_vi_a_scenario();
    p.dynamics.kind = DynamicsKind::Penalty;
    p.dynamics.rho = 4.0;
    const RunResult pr = run_scenario(p);
    CHECK(pr.trajectory.dynamics == "penalty");
    // Penalty equilibrium solves (I + rho L) y = -b; the mean is still x*.
    const SupraLaplacian sl = scenario_laplacian(p);
    Vector b(6);
    b << 1, 2, 3, 4, 5, 6;
    const Vector ystar = (Matrix::Identity(6, 6) + 4.0 * sl.entries()).partialPivLu().solve(-b);
    CHECK((pr.trajectory.final_state().y - ystar).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(ystar.mean() == doctest::Approx(-3.5));
}

TEST_CASE("random initial states are seeded") {
    Scenario s = build_vi_a_scenario();
    s.initial.mode = InitialMode::Random;
    CHECK_THROWS_AS(s.validate(), InvalidModel);
    s.initial.seed = 5;
    s.integrator.t_end = 2.0;
    const FlowSystem sys = build_flow_system(s);
    const FlowState a = initial_state(s, sys);
    const FlowState b = initial_state(s, sys);
    CHECK(a.y == b.y);
    CHECK(a.lambda == b.lambda);
    CHECK(a.y.cwiseAbs().maxCoeff() <= 5.0);
    CHECK_FALSE(a.y.isZero());

    const RunResult r1 = run_scenario(s);
    const RunResult r2 = run_scenario(s);
    CHECK(run_summary_json(s, r1) == run_summary_json(s, r2));
    REQUIRE(r1.trajectory.samples.size() == r2.trajectory.samples.size());
    for (std::size_t k = 0; k < r1.trajectory.samples.size(); ++k) {
        CHECK(r1.trajectory.samples[k].y == r2.trajectory.samples[k].y);
    }
}

TEST_CASE("scenario validation") {
    Scenario s = build_vi_a_scenario();
    s.id.clear();
    CHECK_THROWS_AS(s.validate(), InvalidModel);

    s = build_vi_a_scenario();
    s.detection.eps = 0.0;
    CHECK_THROWS_AS(s.validate(), InvalidModel);

    s = build_vi_a_scenario();
    s.dynamics.kind = DynamicsKind::Dispatch;
    CHECK_THROWS_AS(s.validate(), InvalidModel);

    s = build_vi_a_scenario();
    s.network.layers[0].topology = Topology::Weights;
    s.network.layers[0].weights = {{0, 1, 0}, {2, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(s.validate(), InvalidModel);

    s = build_vi_a_scenario();
    s.initial.mode = InitialMode::Explicit;
    s.initial.y = {1, 2};
    CHECK_THROWS_AS(s.validate(), InvalidModel);

    s = build_vi_a_scenario();
    s.objectives.generator = ObjectiveGenerator::Zero;
    CHECK_THROWS_AS(s.validate(), InvalidModel);  // no closed-form reference

    CHECK_THROWS_AS(run_scenario(build_dispatch_scenario()), InvalidModel);
    CHECK_THROWS_AS(run_dispatch(build_vi_a_scenario()), InvalidModel);
}

TEST_CASE("log-spaced grid") {
    const auto g = log_spaced(0.01, 10.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 10.0);
    CHECK(g[1] == doctest::Approx(0.1));
    CHECK(g[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(log_spaced(0.0, 1.0, 3), InvalidModel);
    CHECK_THROWS_AS(log_spaced(1.0, 1.0, 3), InvalidModel);
    CHECK_THROWS_AS(log_spaced(0.1, 1.0, 1), InvalidModel);
}

TEST_CASE("interlayer sweep") {
    const Scenario base = short_vi_b();
    const std::vector<double> dx{0.1, 0.5, 0.5, 2.0, 10.0};
    const SweepResult rows = sweep_interlayer(base, dx, 1e-2);
    REQUIRE(rows.size() == 5);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].dx == dx[k]);
        CHECK_FALSE(rows[k].failed);
    }
    // Identical consecutive points give identical rows.
    CHECK(rows[1].t_c == rows[2].t_c);
    CHECK(rows[1].lambda_2 == rows[2].lambda_2);
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].lambda_2 >= rows[k - 1].lambda_2 - 1e-12);
    // not-reached ranks after every finite time.
    REQUIRE(rows.back().t_c);
    if (rows.front().t_c) CHECK(*rows.back().t_c <= *rows.front().t_c);

    // Threads merge in input order and change nothing.
    const SweepResult threaded = sweep_interlayer(base, dx, 1e-2, 3);
    CHECK(sweep_csv(threaded) == sweep_csv(rows));

    const std::string csv = sweep_csv(rows);
    CHECK(csv.rfind("d_x,t_c,lambda_2\n", 0) == 0);

    CHECK_THROWS_AS(sweep_interlayer(base, {1.0, 0.5}, 1e-2), InvalidModel);
    CHECK_THROWS_AS(sweep_interlayer(build_dispatch_scenario(), {1.0}, 1e-2), InvalidModel);
}

TEST_CASE("sweep flags failing points and keeps going") {
    Scenario s = short_vi_b(40);
    // Far outside RK4's stability region once D_x is large.
    s.integrator.step = 0.5;
    const SweepResult rows = sweep_interlayer(s, {0.01, 50.0}, 1e-2);
    CHECK_FALSE(rows[0].failed);
    CHECK(rows[1].failed);
    CHECK_FALSE(rows[1].t_c.has_value());
    CHECK(rows[1].error.rfind("NUMERICAL_DIVERGENCE", 0) == 0);
    CHECK(sweep_csv(rows).find("50,not-reached,") != std::string::npos);
}

TEST_CASE("dispatch builder") {
    const Scenario s = build_dispatch_scenario();
    CHECK_NOTHROW(s.validate());
    const MultiplexNetwork net = s.network.build();
    CHECK(net.n_nodes() == 7);
    CHECK(net.n_layers() == 3);
    CHECK(net.inter_diffusion(0, 1) == 0.6);
    CHECK(net.inter_diffusion(1, 2) == 0.6);
    CHECK(net.inter_diffusion(0, 2) == 0.0);
    CHECK(net.intra_diffusion(0) == 0.2);
    CHECK(net.intra_diffusion(1) == 0.8);
    CHECK(net.intra_diffusion(2) == 0.2);
    const SupraLaplacian sl = scenario_laplacian(s);
    CHECK(sl.entries().block(0, 14, 7, 7).isZero(0.0));
    CHECK(sl.entries().block(14, 0, 7, 7).isZero(0.0));
    REQUIRE(s.dispatch);
    CHECK(s.dispatch->phi == 0.7);
    CHECK(s.dispatch->power_demand == 100.0);
    CHECK(s.dispatch->gas_demand == 100.0);
    const ObjectiveSet obj = s.objectives.build(7, 3);
    for (const auto& c : obj.costs()) CHECK(c.quadratic() == Quadratic{1.0, 0.0});
}

TEST_CASE("dispatch runs") {
    SUBCASE("zero demand from rest is identically zero") {
        Scenario s = build_dispatch_scenario();
        s.dispatch->power_demand = 0.0;
        s.dispatch->gas_demand = 0.0;
        s.integrator.t_end = 10.0;
        const DispatchResult r = run_dispatch(s);
        for (const auto& st : r.trajectory.samples) CHECK(st.y.isZero());
        CHECK(r.power_balance_residual == 0.0);
    }
    SUBCASE("intralayer coupling reaches the reduced optimum") {
        Eigen::Matrix2d m;
        m << 14.0, -4.9, -4.9, 7.0 + 3.43;
        const Eigen::Vector2d ac = m.partialPivLu().solve(Eigen::Vector2d(100, 100));
        const double expect[] = {ac(0), ac(0) - 0.7 * ac(1), ac(1)};
        for (auto order : {DispatchOrder::First, DispatchOrder::Second}) {
            Scenario s = build_dispatch_scenario(order);
            s.dispatch->coupling = ConsensusCoupling::Intralayer;
            const DispatchResult r = run_dispatch(s);
            CHECK(r.power_balance_residual < 1e-2);
            CHECK(r.gas_balance_residual < 1e-2);
            CHECK(r.per_layer_consensus_residual < 1e-2);
            for (int a = 0; a < 3; ++a) CHECK(std::abs(r.layer_means[a] - expect[a]) < 1e-2);
        }
    }
    SUBCASE("both orders agree under full coupling") {
        const DispatchResult a = run_dispatch(build_dispatch_scenario(DispatchOrder::First));
        const DispatchResult b = run_dispatch(build_dispatch_scenario(DispatchOrder::Second));
        CHECK((a.trajectory.final_state().y - b.trajectory.final_state().y).lpNorm<Eigen::Infinity>() < 1e-2);
        CHECK(a.trajectory.dynamics == "dispatch_first_order");
        CHECK(b.trajectory.dynamics == "dispatch_second_order");
        const auto j = nlohmann::json::parse(dispatch_summary_json(build_dispatch_scenario(), a));
        CHECK(j["coupling"] == "supra");
        CHECK(j["layer_means"].size() == 3);
    }
    SUBCASE("clamping keeps every replica inside its bounds") {
        Scenario s = build_dispatch_scenario();
        s.dispatch->clamp = true;
        s.dispatch->bounds = {{0.0, 5.0}, {0.0, 5.0}, {0.0, 30.0}};
        s.integrator.t_end = 20.0;
        const DispatchResult r = run_dispatch(s);
        for (const auto& st : r.trajectory.samples) {
            CHECK(st.y.head(14).maxCoeff() <= 5.0);
            CHECK(st.y.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("run summary JSON") {
    const Scenario s = build_vi_a_scenario();
    const RunResult r = run_scenario(s);
    const auto j = nlohmann::json::parse(run_summary_json(s, r));
    CHECK(j["scenario"] == "vi_a");
    CHECK(j["xstar"].get<double>() == doctest::Approx(-3.5));
    CHECK(j["final_max_error"].get<double>() < 1e-3);
    CHECK(j["t_c"].is_number());

    Scenario never = s;
    never.integrator.t_end = 0.5;
    const auto j2 = nlohmann::json::parse(run_summary_json(never, run_scenario(never)));
    CHECK(j2["t_c"] == "not-reached");
}
