#include "trustshape/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trustshape {

namespace {

constexpr double kWeightTol = 1e-9;
constexpr double kProbTol = 1e-12;

double checked_success_prob(double p, int stage, int action) {
    if (!(p >= -kProbTol) || !(p <= 1.0 + kProbTol))
        throw std::domain_error("stage model returned success probability " + std::to_string(p) +
                                " outside [0,1] at stage " + std::to_string(stage) + ", action " +
                                std::to_string(action));
    return std::min(1.0, std::max(0.0, p));
}

void check_reward(double r, int stage, int action) {
    if (!std::isfinite(r))
        throw std::domain_error("stage model returned non-finite reward at stage " +
                                std::to_string(stage) + ", action " + std::to_string(action));
}

void check_policy_shape(const GameSpec& spec, const PolicyRule& policy) {
    const std::size_t m = spec.observations.size();
    if (policy.table.size() < static_cast<std::size_t>(spec.horizon))
        throw std::invalid_argument("policy rule undefined: covers fewer stages than the horizon");
    for (int n = 1; n <= spec.horizon; ++n) {
        const auto& row = policy.table[n - 1];
        if (row.size() < static_cast<std::size_t>(n))
            throw std::invalid_argument("policy rule undefined at stage " + std::to_string(n) +
                                        ": missing lattice nodes");
        for (int k = 0; k < n; ++k) {
            if (row[k].size() < m)
                throw std::invalid_argument("policy rule undefined at stage " + std::to_string(n) +
                                            ", node " + std::to_string(k) +
                                            ": missing observation entries");
            for (std::size_t j = 0; j < m; ++j) {
                if (row[k][j] != 0 && row[k][j] != 1)
                    throw std::invalid_argument("policy rule action must be 0 or 1");
            }
        }
    }
}

OutcomeDraw default_draw(const GameSpec& spec, int stage, const TrustState& state, double obs,
                         int action, RngStream& rng) {
    StageOutcome out = spec.stage_model(stage, state, obs, action);
    check_reward(out.reward, stage, action);
    double p = checked_success_prob(out.success_prob, stage, action);
    OutcomeDraw draw;
    draw.performance = rng.bernoulli(p) ? 1.0 : 0.0;
    draw.task_reward = out.reward;
    return draw;
}

int sample_node(const Quadrature& q, RngStream& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
        acc += q.weights[j];
        if (u < acc) return static_cast<int>(j);
    }
    return static_cast<int>(q.size()) - 1;
}

}

void validate_spec(const GameSpec& spec) {
    if (spec.horizon < 1) throw std::invalid_argument("GameSpec: horizon must be >= 1");
    if (!(spec.discount >= 0.0) || !(spec.discount <= 1.0))
        throw std::invalid_argument("GameSpec: discount must lie in [0,1]");
    if (!spec.stage_model) throw std::invalid_argument("GameSpec: stage model is required");
    if (spec.observations.size() == 0)
        throw std::invalid_argument("GameSpec: observation law must have at least one node");
    if (spec.observations.weights.size() != spec.observations.nodes.size())
        throw std::invalid_argument("GameSpec: observation nodes and weights differ in length");
    double total = 0.0;
    for (double w : spec.observations.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("GameSpec: observation weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightTol)
        throw std::invalid_argument("GameSpec: observation weights must sum to 1 (got " +
                                    std::to_string(total) + ")");
}

TrustState lattice_state(const GameSpec& spec, int stage, int k) {
    if (stage < 1 || stage > spec.horizon + 1)
        throw std::invalid_argument("lattice_state: stage outside 1..horizon+1");
    if (k < 0 || k >= stage)
        throw std::invalid_argument("lattice_state: success count outside 0..stage-1");
    return TrustState(spec.initial.alpha + spec.trust.w_s * k,
                      spec.initial.beta + spec.trust.w_f * (stage - 1 - k));
}

PolicyRule PolicyRule::constant(const GameSpec& spec, int action) {
    if (action != 0 && action != 1)
        throw std::invalid_argument("PolicyRule::constant: action must be 0 or 1");
    PolicyRule rule;
    rule.table.resize(static_cast<std::size_t>(spec.horizon));
    for (int n = 1; n <= spec.horizon; ++n)
        rule.table[n - 1].assign(static_cast<std::size_t>(n),
                                 std::vector<int>(spec.observations.size(), action));
    return rule;
}

PolicyRule PolicyRule::random(const GameSpec& spec, RngStream& rng) {
    PolicyRule rule = constant(spec, 0);
    for (auto& row : rule.table)
        for (auto& node : row)
            for (auto& a : node) a = rng.bernoulli(0.5) ? 1 : 0;
    return rule;
}

std::array<double, 2> stage_q_values(const GameSpec& spec, const ValueTable& cont, int stage, int k,
                                     double obs) {
    const TrustState state = lattice_state(spec, stage, k);
    std::array<double, 2> q{};
    for (int a = 0; a < 2; ++a) {
        StageOutcome out = spec.stage_model(stage, state, obs, a);
        check_reward(out.reward, stage, a);
        double p = checked_success_prob(out.success_prob, stage, a);
        q[a] = out.reward +
               spec.discount * (p * cont.at(stage + 1, k + 1) + (1.0 - p) * cont.at(stage + 1, k));
    }
    return q;
}

SolveResult solve_optimal(const GameSpec& spec) {
    validate_spec(spec);
    const int N = spec.horizon;
    const std::size_t m = spec.observations.size();

    ValueTable values;
    values.stages.resize(static_cast<std::size_t>(N) + 1);
    values.stages[N].assign(static_cast<std::size_t>(N) + 1, 0.0);

    PolicyRule policy;
    policy.table.resize(static_cast<std::size_t>(N));

    for (int n = N; n >= 1; --n) {
        values.stages[n - 1].assign(static_cast<std::size_t>(n), 0.0);
        policy.table[n - 1].assign(static_cast<std::size_t>(n), std::vector<int>(m, 0));
        for (int k = 0; k < n; ++k) {
            double v = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                auto q = stage_q_values(spec, values, n, k, spec.observations.nodes[j]);
                const int a = q[1] > q[0] ? 1 : 0;  // ties resolve to action 0
                policy.table[n - 1][k][j] = a;
                v += spec.observations.weights[j] * q[a];
            }
            values.stages[n - 1][k] = v;
        }
    }
    return {std::move(values), std::move(policy)};
}

ValueTable evaluate_policy(const GameSpec& spec, const PolicyRule& policy) {
    validate_spec(spec);
    check_policy_shape(spec, policy);
    const int N = spec.horizon;
    const std::size_t m = spec.observations.size();

    ValueTable values;
    values.stages.resize(static_cast<std::size_t>(N) + 1);
    values.stages[N].assign(static_cast<std::size_t>(N) + 1, 0.0);

    for (int n = N; n >= 1; --n) {
        values.stages[n - 1].assign(static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k < n; ++k) {
            double v = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                auto q = stage_q_values(spec, values, n, k, spec.observations.nodes[j]);
                v += spec.observations.weights[j] * q[policy.action(n, k, static_cast<int>(j))];
            }
            values.stages[n - 1][k] = v;
        }
    }
    return values;
}

std::vector<std::vector<double>> occupancy_table(const GameSpec& spec, const PolicyRule& policy) {
    validate_spec(spec);
    check_policy_shape(spec, policy);
    const int N = spec.horizon;
    const std::size_t m = spec.observations.size();

    std::vector<std::vector<double>> occ(static_cast<std::size_t>(N) + 1);
    occ[0] = {1.0};
    for (int n = 1; n <= N; ++n) {
        occ[n].assign(static_cast<std::size_t>(n) + 1, 0.0);
        for (int k = 0; k < n; ++k) {
            const double mass = occ[n - 1][k];
            if (mass == 0.0) continue;
            const TrustState state = lattice_state(spec, n, k);
            double p_succ = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                const int a = policy.action(n, k, static_cast<int>(j));
                StageOutcome out = spec.stage_model(n, state, spec.observations.nodes[j], a);
                p_succ += spec.observations.weights[j] * checked_success_prob(out.success_prob, n, a);
            }
            occ[n][k + 1] += mass * p_succ;
            occ[n][k] += mass * (1.0 - p_succ);
        }
    }
    return occ;
}

std::vector<double> final_state_distribution(const GameSpec& spec, const PolicyRule& policy) {
    return occupancy_table(spec, policy).back();
}

Trajectory simulate_rollout(const GameSpec& spec, const PolicyRule& policy, RngStream& rng) {
    validate_spec(spec);
    check_policy_shape(spec, policy);
    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(spec.horizon));
    TrustState state = spec.initial;
    int k = 0;
    for (int n = 1; n <= spec.horizon; ++n) {
        const int j = sample_node(spec.observations, rng);
        const double obs = spec.observations.nodes[j];
        const int a = policy.action(n, k, j);
        OutcomeDraw draw = spec.sampler ? spec.sampler(n, state, obs, a, rng)
                                        : default_draw(spec, n, state, obs, a, rng);
        if (draw.performance != 0.0 && draw.performance != 1.0)
            throw std::domain_error("rollout sampler must return binary performance");
        const TrustState next = update_trust(state, draw.performance, spec.trust);

        StageRecord rec;
        rec.state = state;
        rec.observation = obs;
        rec.robot_action = a;
        rec.human_action = draw.human_action;
        rec.threat = draw.threat;
        rec.performance = draw.performance;
        rec.task_reward = draw.task_reward;
        rec.shaping_reward = draw.shaping_reward;
        rec.next_state = next;
        traj.steps.push_back(rec);

        state = next;
        if (draw.performance == 1.0) ++k;
    }
    return traj;
}

RolloutStats mc_rollout_stats(const GameSpec& spec, const PolicyRule& policy, long samples,
                              std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mc_rollout_stats: sample count must be >= 1");
    validate_spec(spec);
    check_policy_shape(spec, policy);

    // Welford accumulators for the discounted reward total and final trust.
    double mean_v = 0.0, m2_v = 0.0;
    double mean_t = 0.0, m2_t = 0.0;
    for (long i = 0; i < samples; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        Trajectory traj = simulate_rollout(spec, policy, rng);
        double total = 0.0;
        double disc = 1.0;
        for (const auto& step : traj.steps) {
            total += disc * (step.task_reward + step.shaping_reward);
            disc *= spec.discount;
        }
        const double ft = expected_trust(traj.steps.back().next_state);

        const double n = static_cast<double>(i + 1);
        double dv = total - mean_v;
        mean_v += dv / n;
        m2_v += dv * (total - mean_v);
        double dt = ft - mean_t;
        mean_t += dt / n;
        m2_t += dt * (ft - mean_t);
    }

    auto finish = [samples, seed](double mean, double m2) {
        McEstimate e;
        e.mean = mean;
        e.samples = samples;
        e.seed = seed;
        e.std_error = samples > 1 ? std::sqrt(m2 / (samples - 1) / samples) : 0.0;
        return e;
    };
    return {finish(mean_v, m2_v), finish(mean_t, m2_t)};
}

McEstimate mc_estimate_value(const GameSpec& spec, const PolicyRule& policy, long samples,
                             std::uint64_t seed) {
    return mc_rollout_stats(spec, policy, samples, seed).value;
}

double brute_force_optimal(const GameSpec& spec, std::uint64_t policy_cap) {
    validate_spec(spec);
    const std::size_t m = spec.observations.size();
    std::uint64_t cells = 0;
    for (int n = 1; n <= spec.horizon; ++n) cells += static_cast<std::uint64_t>(n) * m;
    if (cells >= 63 || (1ull << cells) > policy_cap)
        throw std::length_error("brute_force_optimal: " + std::to_string(cells) +
                                " decision cells exceed the policy cap");

    const std::uint64_t count = 1ull << cells;
    double best = -std::numeric_limits<double>::infinity();
    PolicyRule rule = PolicyRule::constant(spec, 0);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        std::uint64_t bit = 0;
        for (int n = 1; n <= spec.horizon; ++n)
            for (int k = 0; k < n; ++k)
                for (std::size_t j = 0; j < m; ++j)
                    rule.table[n - 1][k][j] = static_cast<int>((mask >> bit++) & 1ull);
        best = std::max(best, evaluate_policy(spec, rule).at(1, 0));
    }
    return best;
}

}
