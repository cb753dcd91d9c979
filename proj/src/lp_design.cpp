#include "trustshape/lp_design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trustshape {

double LpSpec::bound() const {
    return std::pow(gamma, -horizon) * epsilon / static_cast<double>(horizon);
}

LpSpec build_lp(const TrustParams& params, double gamma, int horizon, const ShapingBudget& budget) {
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("build_lp: gamma must lie in (0,1]");
    if (horizon < 1) throw std::invalid_argument("build_lp: horizon must be >= 1");
    return LpSpec{params, gamma, horizon, budget.epsilon};
}

LinearPotential solve_closed_form(const LpSpec& lp) {
    if (!(lp.gamma > 0.0) || !(lp.gamma <= 1.0))
        throw std::invalid_argument("solve_closed_form: gamma must lie in (0,1]");
    if (lp.horizon < 1) throw std::invalid_argument("solve_closed_form: horizon must be >= 1");
    if (!(lp.epsilon >= 0.0))
        throw std::invalid_argument("solve_closed_form: epsilon must be nonnegative");
    return LinearPotential{lp.bound() / lp.params.w_s, 0.0};
}

BoundReport verify_loss_constraint(const LinearPotential& phi, const FinalTrustLine& line,
                                   double gamma, int horizon, const ShapingBudget& budget) {
    if (!(gamma > 0.0) || !(gamma <= 1.0))
        throw std::invalid_argument("verify_loss_constraint: gamma must lie in (0,1]");
    if (horizon < 1) throw std::invalid_argument("verify_loss_constraint: horizon must be >= 1");
    // phi is linear on the segment, so its extremes sit at the endpoints.
    const double p0 = phi(line.start());
    const double p1 = phi(line.end());
    const double lhs = std::max(p0, p1) - std::min(p0, p1);
    return BoundReport::upper(lhs, std::pow(gamma, -horizon) * budget.epsilon);
}

double sar_shaping_coefficient(double gamma, int horizon, double epsilon, double w_s) {
    if (!(w_s > 0.0)) throw std::invalid_argument("sar_shaping_coefficient: w_s must be positive");
    ShapingBudget budget(epsilon);
    return build_lp(TrustParams(w_s, 1.0), gamma, horizon, budget).bound() / w_s;
}

}
