#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "trustshape/game.hpp"
#include "trustshape/trust.hpp"

namespace trustshape {

/// Linear potential over trust states: phi(alpha, beta) = a*alpha + b*beta.
struct LinearPotential {
    double a = 0.0;
    double b = 0.0;

    double operator()(const TrustState& s) const { return a * s.alpha + b * s.beta; }

    friend bool operator==(const LinearPotential&, const LinearPotential&) = default;
};

/// Admissible performance-loss budget epsilon >= 0.
struct ShapingBudget {
    double epsilon;

    ShapingBudget(double eps) : epsilon(eps) {
        if (!(epsilon >= 0.0))
            throw std::invalid_argument("ShapingBudget: epsilon must be nonnegative");
    }
};

/// Outcome of a numeric certificate. For inequality certificates
/// `satisfied` means lhs <= rhs + 1e-9; equality certificates check
/// |lhs - rhs| against their stated tolerance. slack = rhs - lhs either way.
struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double slack = 0.0;

    static BoundReport upper(double lhs, double rhs, double tol = 1e-9);
    static BoundReport equality(double lhs, double rhs, double tol);
};

void to_json(nlohmann::json& j, const BoundReport& r);

/// Potential-based stage bonus gamma * phi(next) - phi(current).
double shaping_reward(const LinearPotential& phi, double gamma, const TrustState& state,
                      const TrustState& next);

/// Reward-shaped copy of a game: transitions and observation law are reused
/// unchanged, and each stage reward gains the expected potential bonus under
/// the game's own discount. Rollout draws additionally record the realized
/// bonus separately from the task reward.
GameSpec shape_game(const GameSpec& spec, const LinearPotential& phi);

/// Certifies the exact payoff decomposition for one fixed rule:
///   V'_1(s_1) - V_1(s_1) = gamma^N E[phi(s_{N+1})] - phi(s_1),
/// where V' evaluates the rule in the shaped game and the expectation is
/// over the end-of-horizon state distribution of the rule. Equality
/// certificate at tolerance 1e-8.
BoundReport telescoping_check(const GameSpec& spec, const LinearPotential& phi,
                              const PolicyRule& policy);

/// Outcome of the performance-loss certificate.
struct LossBoundReport {
    /// E_shaped-opt[phi(s_{N+1})] - E_opt[phi(s_{N+1})] <= gamma^-N * epsilon.
    BoundReport potential_gap;
    /// V_1^opt(s_1) - V_1^shaped-opt(s_1) <= epsilon, both evaluated in the
    /// unshaped game.
    BoundReport loss;
    double shaped_expected_potential = 0.0;
    double original_expected_potential = 0.0;
};

void to_json(nlohmann::json& j, const LossBoundReport& r);

/// Solves the game and its shaped copy, then certifies both halves of the
/// performance-loss guarantee: the expected-potential premise and the loss
/// conclusion. The loss certificate uses tolerance 1e-6 to absorb recursion
/// rounding at tight budgets.
LossBoundReport performance_loss_check(const GameSpec& spec, const LinearPotential& phi,
                                       const ShapingBudget& budget);

/// State-space certificate that implies the loss conclusion without solving:
///   max phi over the shaped-reachable set - min phi over the original
///   reachable set <= gamma^-N * epsilon.
BoundReport potential_range_check(const LinearPotential& phi, const TrustLattice& reachable_shaped,
                                  const TrustLattice& reachable_original, double gamma, int horizon,
                                  const ShapingBudget& budget);

/// Result of a sign-pattern check over explicit transitions.
struct TransitionCheck {
    bool satisfied = true;
    std::vector<std::pair<TrustState, TrustState>> violations;
};

/// Trust-seeking sign pattern over the given transitions: the bonus must be
/// nonnegative when expected trust does not decrease and strictly negative
/// (<= -1e-12) when it decreases.
TransitionCheck trust_seeking_check(const LinearPotential& phi, double gamma,
                                    const std::vector<std::pair<TrustState, TrustState>>& transitions);

/// Calibration sign pattern toward a target expected trust t_star: the bonus
/// must be nonnegative when |E[trust] - t_star| does not increase and
/// strictly negative when it does.
TransitionCheck calibration_check(const LinearPotential& phi, double gamma, double t_star,
                                  const std::vector<std::pair<TrustState, TrustState>>& transitions);

}
