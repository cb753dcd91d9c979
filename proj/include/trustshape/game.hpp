#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "trustshape/quadrature.hpp"
#include "trustshape/rng.hpp"
#include "trustshape/trust.hpp"

namespace trustshape {

/// Expected immediate reward and success probability of one stage
/// interaction, given the current trust state, the per-stage observation and
/// the robot action.
struct StageOutcome {
    double reward = 0.0;
    double success_prob = 0.0;
};

/// Stage model of a finite-horizon trust game. `stage` is 1-based; `action`
/// is binary. The observation may be any value in the support of the
/// observation law, not only a quadrature node.
using StageModel = std::function<StageOutcome(int stage, const TrustState& state, double obs, int action)>;

/// One sampled stage outcome for rollouts. `performance` must be 0 or 1; the
/// trust transition applies it through update_trust. Fields that a model does
/// not produce stay at -1.
struct OutcomeDraw {
    int human_action = -1;
    int threat = -1;
    double performance = 0.0;
    double task_reward = 0.0;
    double shaping_reward = 0.0;
};

using OutcomeSampler =
    std::function<OutcomeDraw(int stage, const TrustState& state, double obs, int action, RngStream& rng)>;

/// Two-player trust game reduced to the robot's side: the human response is
/// folded into the stage model. Trust moves up by w_s on success and the
/// failure count moves up by w_f otherwise, so the reachable states at stage
/// n form an n-point lattice indexed by the success count.
struct GameSpec {
    int horizon = 1;
    double discount = 1.0;
    TrustState initial;
    TrustParams trust;
    StageModel stage_model;
    Quadrature observations;
    /// Optional; when absent, rollouts draw a Bernoulli(success_prob)
    /// performance and record the expected stage reward.
    OutcomeSampler sampler;
};

/// Throws std::invalid_argument when the game violates its contract
/// (horizon < 1, discount outside [0,1], missing stage model, empty or
/// unnormalized observation law).
void validate_spec(const GameSpec& spec);

/// Reachable state at 1-based `stage` with success count `k`.
TrustState lattice_state(const GameSpec& spec, int stage, int k);

/// Stage-indexed value function over the reachable lattice. Stage n holds n
/// entries; stage horizon+1 is the terminal row of zeros.
struct ValueTable {
    std::vector<std::vector<double>> stages;

    double at(int stage, int k) const { return stages.at(stage - 1).at(k); }
    int horizon() const { return static_cast<int>(stages.size()) - 1; }
};

/// Deterministic decision rule (stage, success count, observation node
/// index) -> action. Stored as a dense table over the quadrature nodes.
struct PolicyRule {
    std::vector<std::vector<std::vector<int>>> table;

    int action(int stage, int k, int obs_index) const {
        return table.at(stage - 1).at(k).at(obs_index);
    }

    static PolicyRule constant(const GameSpec& spec, int action);
    static PolicyRule random(const GameSpec& spec, RngStream& rng);

    friend bool operator==(const PolicyRule&, const PolicyRule&) = default;
};

struct SolveResult {
    ValueTable values;
    PolicyRule policy;
};

/// Exact finite-horizon solve by backward induction over the success-count
/// lattice:
///   V_n(k) = sum_o w_o max_a [ r(n,k,o,a) + gamma (p V_{n+1}(k+1) + (1-p) V_{n+1}(k)) ]
/// with V_{horizon+1} identically 0. Argmax ties resolve to action 0.
/// Throws std::domain_error if the stage model returns a non-finite reward
/// or a success probability outside [0,1].
SolveResult solve_optimal(const GameSpec& spec);

/// Exact evaluation of a fixed decision rule by the same recursion without
/// the max. Throws std::invalid_argument if the rule does not cover every
/// reachable (stage, node, observation) cell.
ValueTable evaluate_policy(const GameSpec& spec, const PolicyRule& policy);

/// Per-action continuation values at one reachable node for an arbitrary
/// observation value: q[a] = r(stage,k,obs,a) + gamma * E[cont at stage+1].
/// `cont` supplies the stage+1 values (the optimal table for optimal
/// continuations, a policy-evaluation table for fixed continuations).
std::array<double, 2> stage_q_values(const GameSpec& spec, const ValueTable& cont, int stage, int k,
                                     double obs);

/// Forward state-occupancy pass under a fixed rule. Row n-1 holds the
/// distribution over success counts at stage n (n entries; row horizon holds
/// horizon+1). Every row sums to 1 up to rounding.
std::vector<std::vector<double>> occupancy_table(const GameSpec& spec, const PolicyRule& policy);

/// Distribution over success counts at stage horizon+1 (the end-of-horizon
/// trust lattice) under a fixed rule.
std::vector<double> final_state_distribution(const GameSpec& spec, const PolicyRule& policy);

struct StageRecord {
    TrustState state;
    double observation = 0.0;
    int robot_action = 0;
    int human_action = -1;
    int threat = -1;
    double performance = 0.0;
    double task_reward = 0.0;
    double shaping_reward = 0.0;
    TrustState next_state;
};

struct Trajectory {
    std::vector<StageRecord> steps;
};

/// One episode under a fixed rule. Observations are drawn from the
/// discretized observation law (node j with probability weights[j]), so
/// rollout expectations match the exact recursion node for node.
Trajectory simulate_rollout(const GameSpec& spec, const PolicyRule& policy, RngStream& rng);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long samples = 0;
    std::uint64_t seed = 0;
};

struct RolloutStats {
    McEstimate value;        ///< discounted per-episode reward total
    McEstimate final_trust;  ///< expected trust of the end-of-horizon state
};

/// Monte-Carlo estimates over `samples` independent episodes. Episode i uses
/// substream (seed, i), so estimates are reproducible and independent of
/// evaluation order.
RolloutStats mc_rollout_stats(const GameSpec& spec, const PolicyRule& policy, long samples,
                              std::uint64_t seed);

/// Mean discounted reward total; for an unshaped spec this is the
/// discounted task payoff.
McEstimate mc_estimate_value(const GameSpec& spec, const PolicyRule& policy, long samples,
                             std::uint64_t seed);

/// Exhaustive maximum of evaluate_policy over all deterministic decision
/// rules. Throws std::length_error when the rule count exceeds `policy_cap`.
double brute_force_optimal(const GameSpec& spec, std::uint64_t policy_cap = (1ull << 20));

}
