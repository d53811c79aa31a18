#include <doctest.h>

#include <stdexcept>
#include <algorithm>
#include <cmath>

#include "fieldscope/sim.hpp"

using namespace fieldscope;
using doctest::Approx;

TEST_SUITE_BEGIN("sim");

namespace {

const Bounds kEnv{-20, 20, -20, 20};
const CentralFieldSpec kA1 = CentralFieldSpec::attractor_sqrt({0, 15}, 2.0, 4.0, 80.0);
const CentralFieldSpec kRep = CentralFieldSpec::repeller_exp({0, -5}, 0.8, 1000.0);
const NoiseParams kNoNoise{0.0, 0.0};

}  // namespace

TEST_CASE("spawn_position") {
    SUBCASE("same seed, same position") {
        Rng a(7), b(7);
        const Vec2 p = spawn_position(a, kEnv);
        const Vec2 q = spawn_position(b, kEnv);
        CHECK(p.x == q.x);
        CHECK(p.y == q.y);
    }
    SUBCASE("empirical mean within 3 standard errors of the center") {
        Rng rng(123);
        double sx = 0, sy = 0;
        constexpr int n = 10000;
        for (int i = 0; i < n; ++i) {
            const Vec2 p = spawn_position(rng, kEnv);
            CHECK(p.x >= -20);
            CHECK(p.x <= 20);
            sx += p.x;
            sy += p.y;
        }
        const double se = 40.0 / std::sqrt(12.0) / std::sqrt(double(n));
        CHECK(std::abs(sx / n) < 3 * se);
        CHECK(std::abs(sy / n) < 3 * se);
    }
    SUBCASE("degenerate rectangle returns its single point") {
        Rng rng(1);
        const Vec2 p = spawn_position(rng, {3.0, 3.0, -1.0, -1.0});
        CHECK(p.x == 3.0);
        CHECK(p.y == -1.0);
    }
}

TEST_CASE("step_agent") {
    Rng rng(5);
    SUBCASE("empty field set and zero noise leave the agent in place") {
        const auto r = step_agent({2.0, 3.0}, {}, 1.0, kNoNoise, rng);
        CHECK(r.position.x == 2.0);
        CHECK(r.position.y == 3.0);
        CHECK(r.velocity.x == 0.0);
        CHECK(r.velocity.y == 0.0);
    }
    SUBCASE("constant unit field advances x by dk per step") {
        // A far-away sqrt attractor on the +x axis gives a plateau speed of
        // exactly 1 toward it.
        const auto plateau = CentralFieldSpec::attractor_sqrt({1000, 0}, 2.0, 4.0, 2000.0);
        Vec2 p{0, 0};
        for (int k = 0; k < 5; ++k) {
            const auto r = step_agent(p, {plateau}, 1.0, kNoNoise, rng);
            CHECK(r.velocity.x == Approx(1.0).epsilon(1e-9));
            p = r.position;
        }
        CHECK(p.x == Approx(5.0).epsilon(1e-9));
        CHECK(p.y == Approx(0.0));
    }
    SUBCASE("sqrt attractor in its first branch") {
        // c >= 10 keeps d = 10 inside the sqrt branch: speed sqrt(10)/2.
        const auto spec = CentralFieldSpec::attractor_sqrt({0, 15}, 2.0, 30.0, 80.0);
        const auto r = step_agent({0, 5}, {spec}, 1.0, kNoNoise, rng);
        CHECK(r.velocity.y == Approx(std::sqrt(10.0) / 2.0));
        CHECK(r.velocity.x == Approx(0.0));
        CHECK(r.position.y == Approx(5.0 + std::sqrt(10.0) / 2.0));
    }
}

TEST_CASE("measure") {
    SUBCASE("zero sigma returns the truth") {
        Rng rng(9);
        const Measurement z = measure({1.25, -3.5}, 4, kNoNoise, rng);
        CHECK(z.x == 1.25);
        CHECK(z.y == -3.5);
        CHECK(z.k == 4);
    }
    SUBCASE("sample std within 5% of sigma over 10^4 draws") {
        Rng rng(31);
        const NoiseParams noise{0.0, 0.7};
        double sum = 0, sq = 0;
        constexpr int n = 10000;
        for (int i = 0; i < n; ++i) {
            const Measurement z = measure({0, 0}, i, noise, rng);
            sum += z.x;
            sq += z.x * z.x;
        }
        const double var = sq / n - (sum / n) * (sum / n);
        CHECK(std::sqrt(var) == Approx(0.7).epsilon(0.05));
    }
    SUBCASE("fixed seed reproduces the noise sequence") {
        Rng a(77), b(77);
        const NoiseParams noise{0.0, 0.3};
        for (int i = 0; i < 50; ++i) {
            const Measurement za = measure({1, 2}, i, noise, a);
            const Measurement zb = measure({1, 2}, i, noise, b);
            CHECK(za.x == zb.x);
            CHECK(za.y == zb.y);
        }
    }
}

TEST_CASE("simulate_trajectory termination") {
    const SimLimits limits;
    SUBCASE("start at the destination center arrives immediately") {
        const Trajectory t =
            simulate_trajectory(0, kA1.center, kA1, {}, 1.0, kNoNoise, limits, Rng(3));
        CHECK(t.reason == Termination::Arrived);
        CHECK(t.points.size() == 1);
    }
    SUBCASE("zero-field world runs to max_steps without moving") {
        // Destination whose influence cutoff is tiny: the field is zero at
        // the agent, which starts far outside the stall radius.
        const auto dud = CentralFieldSpec::attractor_sqrt({0, 0}, 2.0, 0.001, 0.002);
        const Trajectory t =
            simulate_trajectory(0, {15.0, 15.0}, dud, {}, 1.0, kNoNoise, limits, Rng(3));
        CHECK(t.reason == Termination::MaxSteps);
        CHECK(t.points.size() == static_cast<std::size_t>(limits.max_steps) + 1);
        CHECK(t.points.back().state.x == 15.0);
        CHECK(t.points.back().state.y == 15.0);
    }
    SUBCASE("rejects a repeller destination") {
        CHECK_THROWS_AS(simulate_trajectory(0, {0, 0}, kRep, {}, 1.0, kNoNoise, limits, Rng(1)),
                        std::invalid_argument);
    }
}

TEST_CASE("noise-free discrete update matches the field exactly") {
    const SimLimits limits;
    const Trajectory t =
        simulate_trajectory(0, {7.0, -12.0}, kA1, {kRep}, 1.0, kNoNoise, limits, Rng(11));
    REQUIRE(t.points.size() > 2);
    const FieldSet active{kA1, kRep};
    for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
        const Vec2 p = t.points[k].state.position();
        const Vec2 v = superpose(active, p);
        CHECK(t.points[k].state.vx == v.x);
        CHECK(t.points[k].state.vy == v.y);
        CHECK(t.points[k + 1].state.x == Approx(p.x + v.x).epsilon(1e-15));
        CHECK(t.points[k + 1].state.y == Approx(p.y + v.y).epsilon(1e-15));
        // noiseless measurements equal the truth
        CHECK(t.points[k].meas.x == t.points[k].state.x);
        CHECK(t.points[k].meas.k == static_cast<int>(k));
    }
}

TEST_CASE("trajectory around a repeller reaches the destination deflected") {
    // Start on the symmetry axis south of the repeller; process noise
    // breaks the tie and the repeller amplifies the lateral deflection.
    const SimLimits limits;
    const NoiseParams noise{0.1, 0.0};
    const Rng rng(4);
    const Trajectory t = simulate_trajectory(0, {0, -20}, kA1, {kRep}, 1.0, noise, limits, rng);
    CHECK(t.reason == Termination::Arrived);

    // Oracle: re-integrate the analytic fields with the same child noise
    // stream; the recorded path must match sample for sample.
    Rng process = rng.child(1);
    Vec2 p{0, -20};
    for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
        const Vec2 v = superpose({kA1, kRep}, p);
        p = p + v;
        p.x += process.normal(0.0, 0.1);
        p.y += process.normal(0.0, 0.1);
        CHECK(t.points[k + 1].state.x == p.x);
        CHECK(t.points[k + 1].state.y == p.y);
    }

    double max_abs_x = 0.0;
    for (const auto& pt : t.points) max_abs_x = std::max(max_abs_x, std::abs(pt.state.x));
    CHECK(max_abs_x > 0.5);                               // deflects off the axis
    CHECK(std::abs(t.points.back().state.x) < max_abs_x);  // and comes back
}

TEST_CASE("run_stage") {
    ScenarioStage stage;
    stage.stage_id = 1;
    stage.new_object = kA1;
    stage.n_trajectories = 100;
    stage.destinations = {0};
    const FieldSet objects{kA1};
    const NoiseParams noise{0.1, 0.1};
    const SimLimits limits;

    SUBCASE("produces exactly the requested number of trajectories") {
        const auto trajs = run_stage(stage, objects, kEnv, 1.0, noise, limits, Rng(42), 1);
        CHECK(trajs.size() == 100);
        for (std::size_t i = 0; i < trajs.size(); ++i)
            CHECK(trajs[i].agent_id == static_cast<int>(i));
    }
    SUBCASE("deterministic and independent of thread count") {
        const auto a = run_stage(stage, objects, kEnv, 1.0, noise, limits, Rng(42), 1);
        const auto b = run_stage(stage, objects, kEnv, 1.0, noise, limits, Rng(42), 4);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].points.size() == b[i].points.size());
            CHECK(a[i].reason == b[i].reason);
            for (std::size_t k = 0; k < a[i].points.size(); ++k) {
                CHECK(a[i].points[k].state.x == b[i].points[k].state.x);
                CHECK(a[i].points[k].meas.y == b[i].points[k].meas.y);
            }
        }
    }
    SUBCASE("alternating destinations split 50/50") {
        ScenarioStage rep_stage;
        rep_stage.stage_id = 3;
        rep_stage.new_object = kRep;
        rep_stage.n_trajectories = 100;
        rep_stage.destinations = {0, 1};
        const FieldSet all{kA1, CentralFieldSpec::attractor_gauss({-10, 10}, 1.1, 8.0, 80.0, 50.0),
                           kRep};
        const auto trajs = run_stage(rep_stage, all, kEnv, 1.0, kNoNoise, limits, Rng(5), 2);
        int to_a1 = 0;
        for (const auto& t : trajs) {
            // Final approach identifies the destination.
            const Vec2 end = t.points.back().state.position();
            if (distance(end, all[0].center) < distance(end, all[1].center)) ++to_a1;
        }
        CHECK(to_a1 == 50);
    }
    SUBCASE("every trajectory is bounded and tagged") {
        const auto trajs = run_stage(stage, objects, kEnv, 1.0, noise, limits, Rng(9), 4);
        for (const auto& t : trajs) {
            CHECK(t.points.size() >= 1);
            CHECK(t.points.size() <= static_cast<std::size_t>(limits.max_steps) + 1);
            if (t.points.size() < static_cast<std::size_t>(limits.max_steps) + 1)
                CHECK(t.reason == Termination::Arrived);
        }
    }
    SUBCASE("rejects a repeller destination index") {
        ScenarioStage bad = stage;
        bad.destinations = {1};
        const FieldSet with_rep{kA1, kRep};
        CHECK_THROWS_AS(run_stage(bad, with_rep, kEnv, 1.0, noise, limits, Rng(1), 1),
                        std::invalid_argument);
    }
}

TEST_SUITE_END();
