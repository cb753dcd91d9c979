#include "trustshape/sar.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace trustshape {

namespace {

double beta_log_pdf(double x, double a, double b) {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + std::lgamma(a + b) -
           std::lgamma(a) - std::lgamma(b);
}

double beta_pdf(double x, double a, double b) { return std::exp(beta_log_pdf(x, a, b)); }

void check_estimate(double d_r, const char* who) {
    if (!(d_r > 0.0) || !(d_r < 1.0))
        throw std::invalid_argument(std::string(who) + ": estimate must lie in (0,1), got " +
                                    std::to_string(d_r));
}

}

void SarConfig::validate() const {
    if (!(kappa_h >= 1.0))
        throw std::invalid_argument("SarConfig: kappa_h must be >= 1, got " + std::to_string(kappa_h));
    if (!(kappa_r > kappa_h))
        throw std::invalid_argument("SarConfig: kappa_r must exceed kappa_h (robot estimates are the sharper ones), got kappa_r=" +
                                    std::to_string(kappa_r) + ", kappa_h=" + std::to_string(kappa_h));
    if (!(w_health >= 0.0) || !(w_time >= 0.0))
        throw std::invalid_argument("SarConfig: cost weights must be nonnegative");
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("SarConfig: gamma must lie in (0,1]");
    if (horizon < 1) throw std::invalid_argument("SarConfig: horizon must be >= 1");
    if (danger_nodes < 2)
        throw std::invalid_argument("SarConfig: danger quadrature needs at least 2 nodes");
    if (estimate_nodes < 2)
        throw std::invalid_argument("SarConfig: estimate quadrature needs at least 2 nodes");
    if (!(d_r_1 > 0.0) || !(d_r_1 < 1.0))
        throw std::invalid_argument("SarConfig: d_r_1 must lie in (0,1)");
    for (const CostCell* c : {&costs.threat_gear, &costs.threat_nogear, &costs.clear_gear,
                              &costs.clear_nogear}) {
        if (!(c->health >= 0.0) || !(c->time >= 0.0))
            throw std::invalid_argument("SarConfig: cost table entries must be nonnegative");
    }
}

double task_reward(int eta, int a_h, const CostTable& costs, double w_health, double w_time) {
    if (eta != 0 && eta != 1) throw std::invalid_argument("task_reward: threat flag must be 0 or 1");
    if (a_h != 0 && a_h != 1) throw std::invalid_argument("task_reward: human action must be 0 or 1");
    const CostCell& c = costs.cell(eta, a_h);
    return -w_health * c.health - w_time * c.time;
}

double compliance_probability(const TrustState& state) { return expected_trust(state); }

double threat_probability(double d_r, ThreatMode mode, double kappa_r, const Quadrature& danger) {
    check_estimate(d_r, "threat_probability");
    if (mode == ThreatMode::kPlugin) return d_r;
    if (!(kappa_r > 0.0))
        throw std::invalid_argument("threat_probability: kappa_r must be positive");
    if (danger.size() == 0)
        throw std::invalid_argument("threat_probability: danger quadrature is empty");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < danger.size(); ++i) {
        const double d = danger.nodes[i];
        const double f = beta_pdf(d_r, kappa_r * d, kappa_r * (1.0 - d));
        num += danger.weights[i] * d * f;
        den += danger.weights[i] * f;
    }
    if (!(den > 0.0) || !std::isfinite(den))
        throw std::domain_error("threat_probability: posterior normalizer degenerate");
    return num / den;
}

StageOutcome expected_stage_outcome(const TrustState& state, double d_r, int a_r,
                                    const SarConfig& config) {
    config.validate();
    if (a_r != 0 && a_r != 1)
        throw std::invalid_argument("expected_stage_outcome: recommendation must be 0 or 1");
    const double q = threat_probability(d_r, config.mode, config.kappa_r,
                                        gauss_legendre_unit(config.danger_nodes));
    const double c = compliance_probability(state);
    StageOutcome out;
    for (int eta = 0; eta < 2; ++eta) {
        const double p_eta = eta ? q : 1.0 - q;
        const double r_comply = task_reward(eta, a_r, config.costs, config.w_health, config.w_time);
        const double r_defy = task_reward(eta, 1 - a_r, config.costs, config.w_health, config.w_time);
        out.reward += p_eta * (c * r_comply + (1.0 - c) * r_defy);
    }
    out.success_prob = a_r ? q : 1.0 - q;
    return out;
}

Quadrature sar_observation_quadrature(const SarConfig& config) {
    config.validate();
    const Quadrature danger = gauss_legendre_unit(config.danger_nodes);
    const Quadrature base = gauss_legendre_unit(config.estimate_nodes);
    Quadrature obs;
    obs.nodes = base.nodes;
    obs.weights.assign(base.size(), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
        double marginal = 0.0;
        for (std::size_t i = 0; i < danger.size(); ++i) {
            const double d = danger.nodes[i];
            marginal += danger.weights[i] *
                        beta_pdf(base.nodes[j], config.kappa_r * d, config.kappa_r * (1.0 - d));
        }
        obs.weights[j] = base.weights[j] * marginal;
        total += obs.weights[j];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        throw std::domain_error("sar_observation_quadrature: marginal law degenerate");
    for (double& w : obs.weights) w /= total;
    return obs;
}

StageModel sar_stage_model(const SarConfig& config) {
    config.validate();
    const Quadrature danger = gauss_legendre_unit(config.danger_nodes);

    // Threat probabilities at the marginal nodes are cached; other estimate
    // values (the fixed first-site estimate, for one) fall through to a
    // direct evaluation.
    const Quadrature obs = sar_observation_quadrature(config);
    std::vector<std::pair<double, double>> cache;
    cache.reserve(obs.size());
    for (double x : obs.nodes)
        cache.emplace_back(x, threat_probability(x, config.mode, config.kappa_r, danger));
    std::sort(cache.begin(), cache.end());

    SarConfig cfg = config;
    return [cfg, danger, cache](int, const TrustState& state, double d_r, int a_r) {
        double q;
        auto it = std::lower_bound(cache.begin(), cache.end(), std::make_pair(d_r, 0.0));
        if (it != cache.end() && it->first == d_r) {
            q = it->second;
        } else {
            q = threat_probability(d_r, cfg.mode, cfg.kappa_r, danger);
        }
        const double c = compliance_probability(state);
        const double r_tg = task_reward(1, 1, cfg.costs, cfg.w_health, cfg.w_time);
        const double r_tn = task_reward(1, 0, cfg.costs, cfg.w_health, cfg.w_time);
        const double r_cg = task_reward(0, 1, cfg.costs, cfg.w_health, cfg.w_time);
        const double r_cn = task_reward(0, 0, cfg.costs, cfg.w_health, cfg.w_time);
        const double r_threat = a_r ? c * r_tg + (1.0 - c) * r_tn : c * r_tn + (1.0 - c) * r_tg;
        const double r_clear = a_r ? c * r_cg + (1.0 - c) * r_cn : c * r_cn + (1.0 - c) * r_cg;
        StageOutcome out;
        out.reward = q * r_threat + (1.0 - q) * r_clear;
        out.success_prob = a_r ? q : 1.0 - q;
        return out;
    };
}

OutcomeSampler sar_outcome_sampler(const SarConfig& config) {
    config.validate();
    const Quadrature danger = gauss_legendre_unit(config.danger_nodes);
    SarConfig cfg = config;
    return [cfg, danger](int, const TrustState& state, double d_r, int a_r, RngStream& rng) {
        const double q = threat_probability(d_r, cfg.mode, cfg.kappa_r, danger);
        OutcomeDraw draw;
        draw.threat = rng.bernoulli(q) ? 1 : 0;
        const bool comply = rng.bernoulli(compliance_probability(state));
        draw.human_action = comply ? a_r : 1 - a_r;
        draw.performance = (a_r == draw.threat) ? 1.0 : 0.0;
        draw.task_reward =
            task_reward(draw.threat, draw.human_action, cfg.costs, cfg.w_health, cfg.w_time);
        return draw;
    };
}

GameSpec build_sar_game(const SarConfig& config) {
    config.validate();
    GameSpec spec;
    spec.horizon = config.horizon;
    spec.discount = config.gamma;
    spec.initial = config.initial;
    spec.trust = config.trust;
    spec.observations = sar_observation_quadrature(config);
    spec.stage_model = sar_stage_model(config);
    spec.sampler = sar_outcome_sampler(config);
    validate_spec(spec);
    return spec;
}

SiteSample sample_site(RngStream& rng, const SarConfig& config) {
    config.validate();
    SiteSample site;
    site.d = rng.uniform01();
    site.eta = rng.bernoulli(site.d) ? 1 : 0;
    const auto clamped = [](double v) { return std::max(v, 1e-6); };
    site.d_h = rng.beta(clamped(config.kappa_h * site.d), clamped(config.kappa_h * (1.0 - site.d)));
    site.d_r = rng.beta(clamped(config.kappa_r * site.d), clamped(config.kappa_r * (1.0 - site.d)));
    const auto open_unit = [](double v) { return std::min(1.0 - 1e-12, std::max(1e-12, v)); };
    site.d_h = open_unit(site.d_h);
    site.d_r = open_unit(site.d_r);
    return site;
}

double myopic_indifference_threshold(const SarConfig& config, double compliance) {
    config.validate();
    if (!(compliance >= 0.0) || !(compliance <= 1.0))
        throw std::invalid_argument("myopic_indifference_threshold: compliance must lie in [0,1]");
    // Expected immediate reward of action a at threat probability q is
    // linear in q; the threshold solves r(1, q) = r(0, q).
    const double c = compliance;
    const auto r = [&](int eta, int a_h) {
        return task_reward(eta, a_h, config.costs, config.w_health, config.w_time);
    };
    const auto reward = [&](int a, double q) {
        const double r_threat = c * r(1, a) + (1.0 - c) * r(1, 1 - a);
        const double r_clear = c * r(0, a) + (1.0 - c) * r(0, 1 - a);
        return q * r_threat + (1.0 - q) * r_clear;
    };
    const double at0 = reward(1, 0.0) - reward(0, 0.0);
    const double at1 = reward(1, 1.0) - reward(0, 1.0);
    const double slope = at1 - at0;
    if (slope == 0.0)
        throw std::domain_error("myopic_indifference_threshold: actions never tie");
    return -at0 / slope;
}

}
