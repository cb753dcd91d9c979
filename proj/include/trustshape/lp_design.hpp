#pragma once

#include "trustshape/shaping.hpp"
#include "trustshape/trust.hpp"

namespace trustshape {

/// Linear program choosing a trust-seeking potential phi = a*alpha + b*beta
/// with a certified loss budget:
///   maximize  a*w_s - b*w_f   (the up-vs-down bonus gap)
///   s.t.     |a*w_s - b*w_f| <= gamma^-N * epsilon / N
///            b = 0.
/// On the end-of-horizon segment a linear phi spans exactly
/// N * |a*w_s - b*w_f|, so the constraint is the loss certificate.
struct LpSpec {
    TrustParams params;
    double gamma = 1.0;
    int horizon = 1;
    double epsilon = 0.0;

    /// Right-hand side gamma^-N * epsilon / N of the budget constraint.
    double bound() const;
};

LpSpec build_lp(const TrustParams& params, double gamma, int horizon, const ShapingBudget& budget);

/// Unique optimum of the program: the budget constraint is active and b = 0,
/// giving a = gamma^-N * epsilon / (N * w_s).
LinearPotential solve_closed_form(const LpSpec& lp);

/// Certifies max-min of phi over the end-of-horizon segment against
/// gamma^-N * epsilon. phi is linear, so the extremes sit at the segment
/// endpoints and the check is exact.
BoundReport verify_loss_constraint(const LinearPotential& phi, const FinalTrustLine& line,
                                   double gamma, int horizon, const ShapingBudget& budget);

/// Success-side coefficient gamma^-N * epsilon / (N * w_s) of the designed
/// potential; the stage bonus it induces is a * (gamma * alpha' - alpha).
double sar_shaping_coefficient(double gamma, int horizon, double epsilon, double w_s);

}
