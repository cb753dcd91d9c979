#include "trustshape/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trustshape {

BoundReport BoundReport::upper(double lhs, double rhs, double tol) {
    return BoundReport{lhs, rhs, lhs <= rhs + tol, rhs - lhs};
}

BoundReport BoundReport::equality(double lhs, double rhs, double tol) {
    return BoundReport{lhs, rhs, std::abs(lhs - rhs) <= tol, rhs - lhs};
}

void to_json(nlohmann::json& j, const BoundReport& r) {
    j = nlohmann::json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"satisfied", r.satisfied}, {"slack", r.slack}};
}

void to_json(nlohmann::json& j, const LossBoundReport& r) {
    j = nlohmann::json{{"potential_gap", r.potential_gap},
                       {"loss", r.loss},
                       {"shaped_expected_potential", r.shaped_expected_potential},
                       {"original_expected_potential", r.original_expected_potential}};
}

double shaping_reward(const LinearPotential& phi, double gamma, const TrustState& state,
                      const TrustState& next) {
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("shaping_reward: gamma must lie in (0,1]");
    return gamma * phi(next) - phi(state);
}

GameSpec shape_game(const GameSpec& spec, const LinearPotential& phi) {
    validate_spec(spec);
    GameSpec shaped = spec;
    const double g = spec.discount;
    const TrustParams tp = spec.trust;

    StageModel base_model = spec.stage_model;
    shaped.stage_model = [base_model, phi, g, tp](int stage, const TrustState& s, double obs,
                                                  int action) {
        StageOutcome out = base_model(stage, s, obs, action);
        const TrustState up(s.alpha + tp.w_s, s.beta);
        const TrustState down(s.alpha, s.beta + tp.w_f);
        out.reward += out.success_prob * (g * phi(up) - phi(s)) +
                      (1.0 - out.success_prob) * (g * phi(down) - phi(s));
        return out;
    };

    OutcomeSampler base_sampler = spec.sampler;
    StageModel model_for_default = spec.stage_model;
    shaped.sampler = [base_sampler, model_for_default, phi, g, tp](int stage, const TrustState& s,
                                                                   double obs, int action,
                                                                   RngStream& rng) {
        OutcomeDraw draw;
        if (base_sampler) {
            draw = base_sampler(stage, s, obs, action, rng);
        } else {
            StageOutcome out = model_for_default(stage, s, obs, action);
            draw.performance = rng.bernoulli(std::min(1.0, std::max(0.0, out.success_prob))) ? 1.0 : 0.0;
            draw.task_reward = out.reward;
        }
        const TrustState next = update_trust(s, draw.performance, tp);
        draw.shaping_reward += g * phi(next) - phi(s);
        return draw;
    };
    return shaped;
}

namespace {

double expected_final_potential(const GameSpec& spec, const LinearPotential& phi,
                                const std::vector<double>& final_dist) {
    double total = 0.0;
    for (std::size_t k = 0; k < final_dist.size(); ++k)
        total += final_dist[k] * phi(lattice_state(spec, spec.horizon + 1, static_cast<int>(k)));
    return total;
}

}

BoundReport telescoping_check(const GameSpec& spec, const LinearPotential& phi,
                              const PolicyRule& policy) {
    const GameSpec shaped = shape_game(spec, phi);
    const double lhs = evaluate_policy(shaped, policy).at(1, 0) - evaluate_policy(spec, policy).at(1, 0);
    const double e_phi = expected_final_potential(spec, phi, final_state_distribution(spec, policy));
    const double rhs = std::pow(spec.discount, spec.horizon) * e_phi - phi(spec.initial);
    return BoundReport::equality(lhs, rhs, 1e-8);
}

LossBoundReport performance_loss_check(const GameSpec& spec, const LinearPotential& phi,
                                       const ShapingBudget& budget) {
    const auto original = solve_optimal(spec);
    const GameSpec shaped_spec = shape_game(spec, phi);
    const auto shaped = solve_optimal(shaped_spec);

    const double e_shaped =
        expected_final_potential(spec, phi, final_state_distribution(spec, shaped.policy));
    const double e_original =
        expected_final_potential(spec, phi, final_state_distribution(spec, original.policy));
    const double scale = std::pow(spec.discount, -spec.horizon);

    LossBoundReport report;
    report.shaped_expected_potential = e_shaped;
    report.original_expected_potential = e_original;
    report.potential_gap = BoundReport::upper(e_shaped - e_original, scale * budget.epsilon);

    const double v_opt = original.values.at(1, 0);
    const double v_shaped_rule = evaluate_policy(spec, shaped.policy).at(1, 0);
    report.loss = BoundReport::upper(v_opt - v_shaped_rule, budget.epsilon, 1e-6);
    return report;
}

BoundReport potential_range_check(const LinearPotential& phi, const TrustLattice& reachable_shaped,
                                  const TrustLattice& reachable_original, double gamma, int horizon,
                                  const ShapingBudget& budget) {
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("potential_range_check: gamma must lie in (0,1]");
    if (horizon < 1) throw std::invalid_argument("potential_range_check: horizon must be >= 1");
    if (reachable_shaped.points.empty() || reachable_original.points.empty())
        throw std::invalid_argument("potential_range_check: reachable sets must be nonempty");

    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : reachable_shaped.points) hi = std::max(hi, phi(s));
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : reachable_original.points) lo = std::min(lo, phi(s));

    return BoundReport::upper(hi - lo, std::pow(gamma, -horizon) * budget.epsilon);
}

namespace {

TransitionCheck sign_pattern_check(const LinearPotential& phi, double gamma,
                                   const std::vector<std::pair<TrustState, TrustState>>& transitions,
                                   const std::function<bool(const TrustState&, const TrustState&)>& improves) {
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("sign pattern check: gamma must lie in (0,1]");
    TransitionCheck result;
    for (const auto& [from, to] : transitions) {
        const double bonus = gamma * phi(to) - phi(from);
        // Strictly negative is enforced as <= -1e-12 so a zero potential
        // cannot pass as "discouraging" a transition.
        const bool ok = improves(from, to) ? bonus >= 0.0 : bonus <= -1e-12;
        if (!ok) {
            result.satisfied = false;
            result.violations.emplace_back(from, to);
        }
    }
    return result;
}

}

TransitionCheck trust_seeking_check(const LinearPotential& phi, double gamma,
                                    const std::vector<std::pair<TrustState, TrustState>>& transitions) {
    return sign_pattern_check(phi, gamma, transitions, [](const TrustState& from, const TrustState& to) {
        return expected_trust(to) >= expected_trust(from);
    });
}

TransitionCheck calibration_check(const LinearPotential& phi, double gamma, double t_star,
                                  const std::vector<std::pair<TrustState, TrustState>>& transitions) {
    if (!(t_star >= 0.0) || !(t_star <= 1.0))
        throw std::invalid_argument("calibration_check: target trust must lie in [0,1]");
    return sign_pattern_check(phi, gamma, transitions,
                              [t_star](const TrustState& from, const TrustState& to) {
                                  return std::abs(expected_trust(to) - t_star) <=
                                         std::abs(expected_trust(from) - t_star);
                              });
}

}
