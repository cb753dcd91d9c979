#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "trustshape/game.hpp"
#include "trustshape/quadrature.hpp"
#include "trustshape/rng.hpp"

using namespace trustshape;

namespace {

// Rewards fixed per action, success certain for action 0 and impossible for
// action 1. Every value is checkable by hand.
GameSpec fixed_reward_game(double r0, double r1, int horizon, double discount) {
    GameSpec spec;
    spec.horizon = horizon;
    spec.discount = discount;
    spec.initial = TrustState(1, 1);
    spec.trust = TrustParams(1.0, 1.0);
    spec.observations = Quadrature{{0.5}, {1.0}};
    spec.stage_model = [r0, r1](int, const TrustState&, double, int action) {
        return action == 0 ? StageOutcome{r0, 1.0} : StageOutcome{r1, 0.0};
    };
    return spec;
}

// Action 0 trades immediate reward for trust; stage rewards depend on the
// lattice position and the observation, so continuations matter.
GameSpec toy_game(int horizon, double discount) {
    GameSpec spec;
    spec.horizon = horizon;
    spec.discount = discount;
    spec.initial = TrustState(1, 1);
    spec.trust = TrustParams(1.0, 1.0);
    spec.observations = gauss_legendre_unit(3);
    spec.stage_model = [](int, const TrustState& s, double obs, int action) {
        double et = expected_trust(s);
        if (action == 0) return StageOutcome{0.2 + 0.5 * obs, 0.25 + 0.5 * et};
        return StageOutcome{1.0 - 0.3 * obs, 0.9 - 0.4 * et};
    };
    return spec;
}

GameSpec random_game(RngStream& rng, int horizon, int nodes) {
    GameSpec spec;
    spec.horizon = horizon;
    spec.discount = rng.uniform(0.1, 1.0);
    spec.initial = TrustState(1.0 + rng.uniform01(), 1.0 + rng.uniform01());
    spec.trust = TrustParams(0.5 + rng.uniform01(), 0.5 + rng.uniform01());
    spec.observations = gauss_legendre_unit(nodes);
    double a0 = rng.uniform(-2, 2), a1 = rng.uniform(-2, 2);
    double b0 = rng.uniform(-1, 1), b1 = rng.uniform(-1, 1);
    double c0 = rng.uniform01(), c1 = rng.uniform01();
    spec.stage_model = [=](int stage, const TrustState& s, double obs, int action) {
        double base = action == 0 ? a0 : a1;
        double slope = action == 0 ? b0 : b1;
        double p = action == 0 ? c0 : c1;
        double r = base + slope * obs + 0.1 * stage + 0.05 * s.alpha - 0.05 * s.beta;
        double q = 0.5 * p + 0.4 * expected_trust(s);
        return StageOutcome{r, q};
    };
    return spec;
}

bool same_trajectory(const Trajectory& x, const Trajectory& y) {
    if (x.steps.size() != y.steps.size()) return false;
    for (std::size_t i = 0; i < x.steps.size(); ++i) {
        const auto& a = x.steps[i];
        const auto& b = y.steps[i];
        if (!(a.state == b.state) || !(a.next_state == b.next_state)) return false;
        if (a.observation != b.observation || a.robot_action != b.robot_action) return false;
        if (a.performance != b.performance || a.task_reward != b.task_reward) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("one-stage solve picks the better action") {
    auto spec = fixed_reward_game(-6.0, -50.0, 1, 0.9);
    auto res = solve_optimal(spec);
    CHECK(res.values.at(1, 0) == doctest::Approx(-6.0));
    CHECK(res.policy.action(1, 0, 0) == 0);
}

TEST_CASE("constant rule evaluation accumulates discounted stage rewards") {
    auto spec = fixed_reward_game(-6.0, -50.0, 3, 0.5);
    auto always1 = PolicyRule::constant(spec, 1);
    auto vals = evaluate_policy(spec, always1);
    CHECK(vals.at(1, 0) == doctest::Approx(-50.0 * (1 + 0.5 + 0.25)));
    auto always0 = PolicyRule::constant(spec, 0);
    CHECK(evaluate_policy(spec, always0).at(1, 0) == doctest::Approx(-6.0 * (1 + 0.5 + 0.25)));
}

TEST_CASE("zero discount makes the solve greedy") {
    GameSpec spec;
    spec.horizon = 2;
    spec.discount = 0.0;
    spec.initial = TrustState(1, 1);
    spec.trust = TrustParams(1.0, 1.0);
    spec.observations = Quadrature{{0.5}, {1.0}};
    // action 0 earns nothing now but always succeeds; stage 2 pays for the
    // success through the trust state
    spec.stage_model = [](int stage, const TrustState& s, double, int action) {
        if (stage == 1) return action == 0 ? StageOutcome{0.0, 1.0} : StageOutcome{1.0, 0.0};
        return StageOutcome{10.0 * (s.alpha - 1.0), 0.5};
    };
    auto greedy = solve_optimal(spec);
    CHECK(greedy.policy.action(1, 0, 0) == 1);
    CHECK(greedy.values.at(1, 0) == doctest::Approx(1.0));

    spec.discount = 1.0;
    auto patient = solve_optimal(spec);
    CHECK(patient.policy.action(1, 0, 0) == 0);
    CHECK(patient.values.at(1, 0) == doctest::Approx(10.0));
}

TEST_CASE("optimal policy evaluates back to the optimal values") {
    auto spec = toy_game(6, 0.9);
    auto res = solve_optimal(spec);
    auto vals = evaluate_policy(spec, res.policy);
    for (int stage = 1; stage <= spec.horizon + 1; ++stage)
        for (int k = 0; k < stage; ++k)
            CHECK(vals.at(stage, k) == doctest::Approx(res.values.at(stage, k)).epsilon(1e-12));
}

TEST_CASE("no fixed rule beats the solve") {
    auto spec = toy_game(5, 0.8);
    auto opt = solve_optimal(spec).values.at(1, 0);
    RngStream rng(11);
    for (int i = 0; i < 20; ++i) {
        auto rule = PolicyRule::random(spec, rng);
        CHECK(evaluate_policy(spec, rule).at(1, 0) <= opt + 1e-12);
    }
    CHECK(evaluate_policy(spec, PolicyRule::constant(spec, 0)).at(1, 0) <= opt + 1e-12);
    CHECK(evaluate_policy(spec, PolicyRule::constant(spec, 1)).at(1, 0) <= opt + 1e-12);
}

TEST_CASE("solve agrees with exhaustive rule enumeration on small instances") {
    RngStream rng(42);
    for (int i = 0; i < 5; ++i) {
        auto spec = random_game(rng, 2, 2);
        auto solved = solve_optimal(spec).values.at(1, 0);
        CHECK(solved == doctest::Approx(brute_force_optimal(spec)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("dominated action is never chosen") {
    auto spec = toy_game(4, 0.9);
    spec.stage_model = [](int, const TrustState&, double obs, int action) {
        return StageOutcome{5.0 + obs - (action == 1 ? 0.1 : 0.0), 0.5};
    };
    auto res = solve_optimal(spec);
    for (int stage = 1; stage <= spec.horizon; ++stage)
        for (int k = 0; k < stage; ++k)
            for (std::size_t j = 0; j < spec.observations.size(); ++j)
                CHECK(res.policy.action(stage, k, static_cast<int>(j)) == 0);
}

TEST_CASE("argmax ties resolve to action zero") {
    auto spec = toy_game(3, 1.0);
    spec.stage_model = [](int, const TrustState&, double obs, int) {
        return StageOutcome{obs, 0.5};
    };
    auto res = solve_optimal(spec);
    CHECK(res.policy == PolicyRule::constant(spec, 0));
}

TEST_CASE("single-node value equals the best per-action continuation") {
    auto spec = fixed_reward_game(1.0, 2.0, 4, 0.7);
    auto res = solve_optimal(spec);
    auto q = stage_q_values(spec, res.values, 1, 0, spec.observations.nodes[0]);
    CHECK(std::max(q[0], q[1]) == doctest::Approx(res.values.at(1, 0)).epsilon(1e-12));
    CHECK(res.policy.action(1, 0, 0) == (q[1] > q[0] ? 1 : 0));
}

TEST_CASE("occupancy rows are probability distributions") {
    auto spec = toy_game(5, 0.9);
    RngStream rng(3);
    auto rule = PolicyRule::random(spec, rng);
    auto occ = occupancy_table(spec, rule);
    REQUIRE(occ.size() == static_cast<std::size_t>(spec.horizon + 1));
    for (std::size_t n = 0; n < occ.size(); ++n) {
        REQUIRE(occ[n].size() == n + 1);
        double total = std::accumulate(occ[n].begin(), occ[n].end(), 0.0);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (double p : occ[n]) CHECK(p >= -1e-15);
    }
    CHECK(final_state_distribution(spec, rule) == occ.back());
}

TEST_CASE("certain success concentrates the final distribution") {
    auto spec = fixed_reward_game(1.0, 0.0, 6, 1.0);
    auto dist = final_state_distribution(spec, PolicyRule::constant(spec, 0));
    REQUIRE(dist.size() == 7);
    CHECK(dist.back() == doctest::Approx(1.0));
    // action 1 always fails, so the mass sits at zero successes
    auto fail = final_state_distribution(spec, PolicyRule::constant(spec, 1));
    CHECK(fail.front() == doctest::Approx(1.0));
}

TEST_CASE("rollouts replay identically under the same stream") {
    auto spec = toy_game(8, 0.95);
    auto rule = PolicyRule::constant(spec, 0);
    RngStream r1(17), r2(17), r3(17, 5);
    auto t1 = simulate_rollout(spec, rule, r1);
    auto t2 = simulate_rollout(spec, rule, r2);
    auto t3 = simulate_rollout(spec, rule, r3);
    REQUIRE(t1.steps.size() == 8);
    CHECK(same_trajectory(t1, t2));
    CHECK_FALSE(same_trajectory(t1, t3));
}

TEST_CASE("rollout transitions follow the trust update") {
    auto spec = toy_game(6, 0.9);
    spec.trust = TrustParams(0.8, 1.4);
    RngStream rng(23);
    auto traj = simulate_rollout(spec, PolicyRule::constant(spec, 1), rng);
    for (const auto& step : traj.steps) {
        auto expect = update_trust(step.state, step.performance, spec.trust);
        CHECK(step.next_state == expect);
        CHECK((step.performance == 0.0 || step.performance == 1.0));
    }
}

TEST_CASE("degenerate game rolls out with zero standard error") {
    auto spec = fixed_reward_game(2.5, 0.0, 5, 0.9);
    auto rule = PolicyRule::constant(spec, 0);
    auto est = mc_estimate_value(spec, rule, 200, 9);
    double exact = evaluate_policy(spec, rule).at(1, 0);
    CHECK(est.mean == doctest::Approx(exact).epsilon(1e-12));
    CHECK(est.std_error == 0.0);
    CHECK(est.samples == 200);
}

TEST_CASE("standard error shrinks like the square root of the sample count") {
    auto spec = toy_game(4, 0.9);
    auto rule = PolicyRule::constant(spec, 1);
    auto small = mc_estimate_value(spec, rule, 4000, 101);
    auto large = mc_estimate_value(spec, rule, 16000, 101);
    CHECK(small.std_error > 0.0);
    double ratio = small.std_error / large.std_error;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
}

TEST_CASE("monte carlo matches the recursion within three standard errors") {
    auto spec = toy_game(4, 0.9);
    auto rule = PolicyRule::constant(spec, 1);
    auto est = mc_estimate_value(spec, rule, 20000, 7);
    double exact = evaluate_policy(spec, rule).at(1, 0);
    CHECK(std::abs(est.mean - exact) <= 3.0 * est.std_error + 1e-12);
}

TEST_CASE("final-trust estimates agree with the exact occupancy") {
    auto spec = toy_game(4, 0.9);
    auto rule = PolicyRule::constant(spec, 0);
    auto stats = mc_rollout_stats(spec, rule, 20000, 13);
    auto dist = final_state_distribution(spec, rule);
    double exact = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k)
        exact += dist[k] * expected_trust(lattice_state(spec, spec.horizon + 1, static_cast<int>(k)));
    CHECK(std::abs(stats.final_trust.mean - exact) <= 3.0 * stats.final_trust.std_error + 1e-12);
}

TEST_CASE("incomplete rules are rejected") {
    auto spec = toy_game(3, 0.9);
    auto rule = PolicyRule::constant(spec, 0);
    rule.table.pop_back();
    CHECK_THROWS_AS(evaluate_policy(spec, rule), std::invalid_argument);
}

TEST_CASE("exhaustive search refuses oversized instances") {
    auto spec = toy_game(10, 0.9);
    CHECK_THROWS_AS(brute_force_optimal(spec), std::length_error);
}

TEST_CASE("spec contract violations are rejected") {
    auto good = toy_game(3, 0.9);
    CHECK_NOTHROW(validate_spec(good));

    auto bad = good;
    bad.horizon = 0;
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

    bad = good;
    bad.discount = -0.1;
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
    bad.discount = 1.1;
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

    bad = good;
    bad.stage_model = nullptr;
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

    bad = good;
    bad.observations.weights[0] += 0.1;
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);

    bad = good;
    bad.observations = Quadrature{};
    CHECK_THROWS_AS(validate_spec(bad), std::invalid_argument);
}

TEST_CASE("stage models with broken outputs are caught during the solve") {
    auto spec = toy_game(2, 0.9);
    spec.stage_model = [](int, const TrustState&, double, int) {
        return StageOutcome{std::numeric_limits<double>::quiet_NaN(), 0.5};
    };
    CHECK_THROWS_AS(solve_optimal(spec), std::domain_error);

    spec.stage_model = [](int, const TrustState&, double, int) {
        return StageOutcome{0.0, 1.5};
    };
    CHECK_THROWS_AS(solve_optimal(spec), std::domain_error);
}
