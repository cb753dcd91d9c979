#pragma once

#include <stdexcept>

#include "trustshape/game.hpp"
#include "trustshape/quadrature.hpp"
#include "trustshape/rng.hpp"
#include "trustshape/trust.hpp"

namespace trustshape {

/// How the robot turns its danger estimate d_r into a threat probability.
enum class ThreatMode {
    kPlugin,          ///< use d_r directly
    kBayesPosterior,  ///< posterior mean of the latent danger given d_r
};

/// Health/time cost pair for one (threat, human action) outcome.
struct CostCell {
    double health = 0.0;
    double time = 0.0;
};

/// Site costs by threat presence and gear choice.
struct CostTable {
    CostCell threat_gear{1.0, 300.0};
    CostCell threat_nogear{100.0, 50.0};
    CostCell clear_gear{0.0, 250.0};
    CostCell clear_nogear{0.0, 30.0};

    const CostCell& cell(int threat, int gear) const {
        if (threat) return gear ? threat_gear : threat_nogear;
        return gear ? clear_gear : clear_nogear;
    }
};

/// Search-and-rescue scenario: at each site a latent danger level d is drawn
/// uniformly, a threat materializes with probability d, and the robot
/// recommends protective gear from a private danger estimate d_r. The human
/// follows the recommendation with probability equal to their expected
/// trust. The robot's performance at a site is agreement between its
/// recommendation and the realized threat.
struct SarConfig {
    double kappa_h = 2.0;   ///< human estimate concentration, >= 1
    double kappa_r = 20.0;  ///< robot estimate concentration, > kappa_h
    double w_health = 1.0;
    double w_time = 0.2;
    CostTable costs;
    double gamma = 0.9;
    int horizon = 10;
    TrustParams trust;
    TrustState initial{1.0, 1.0};
    ThreatMode mode = ThreatMode::kPlugin;
    int danger_nodes = 64;    ///< quadrature size over the latent danger
    int estimate_nodes = 64;  ///< quadrature size over the robot estimate
    double d_r_1 = 0.06;      ///< fixed first-site danger estimate

    void validate() const;
};

struct SiteSample {
    double d = 0.0;    ///< latent danger level
    int eta = 0;       ///< threat indicator
    double d_h = 0.0;  ///< human danger estimate
    double d_r = 0.0;  ///< robot danger estimate
};

/// Negative weighted site cost -w_health * health - w_time * time for the
/// realized (threat, gear) outcome.
double task_reward(int eta, int a_h, const CostTable& costs, double w_health, double w_time);

/// Probability that the human follows a recommendation: expected trust.
double compliance_probability(const TrustState& state);

/// Threat probability for an estimate d_r in (0, 1). Plug-in mode returns
/// d_r; posterior mode integrates the uniform-danger likelihood
/// Beta(d_r; kappa_r d, kappa_r (1-d)) over the danger quadrature.
double threat_probability(double d_r, ThreatMode mode, double kappa_r, const Quadrature& danger);

/// Expected site reward and success probability for a recommendation a_r at
/// estimate d_r: the human complies with probability equal to expected
/// trust, the threat arrives with the mode's probability, and success is
/// agreement between recommendation and threat.
StageOutcome expected_stage_outcome(const TrustState& state, double d_r, int a_r,
                                    const SarConfig& config);

/// Discretized marginal law of the robot's estimate under uniform danger;
/// weights normalized to sum to 1.
Quadrature sar_observation_quadrature(const SarConfig& config);

/// Stage model evaluating expected_stage_outcome; threat probabilities at
/// quadrature nodes are precomputed once.
StageModel sar_stage_model(const SarConfig& config);

/// Rollout sampler drawing the threat, the compliance coin and the realized
/// site cost for one stage.
OutcomeSampler sar_outcome_sampler(const SarConfig& config);

/// Complete game for the scenario: marginal estimate quadrature, the site
/// stage model, the trust transition gains and the scenario sampler.
GameSpec build_sar_game(const SarConfig& config);

/// Generative site draw: d ~ U[0,1], eta ~ Bernoulli(d), and the two
/// estimates from Beta(kappa d, kappa (1-d)) with parameters clamped to at
/// least 1e-6.
SiteSample sample_site(RngStream& rng, const SarConfig& config);

/// Threat probability at which the two recommendations tie in expected
/// immediate reward for a given compliance level. Below the threshold the
/// one-site optimal recommendation is a_r = 0.
double myopic_indifference_threshold(const SarConfig& config, double compliance);

}
