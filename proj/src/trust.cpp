#include "trustshape/trust.hpp"

#include <algorithm>
#include <cmath>

namespace trustshape {

TrustState update_trust(const TrustState& state, double performance, const TrustParams& params) {
    if (!(performance >= 0.0) || !(performance <= 1.0))
        throw std::invalid_argument("update_trust: performance must lie in [0,1]");
    return TrustState(state.alpha + params.w_s * performance,
                      state.beta + params.w_f * (1.0 - performance));
}

double expected_trust(const TrustState& state) {
    return state.alpha / (state.alpha + state.beta);
}

TrustLattice reachable_lattice(const TrustState& initial, const TrustParams& params, int stage) {
    if (stage < 1) throw std::invalid_argument("reachable_lattice: stage must be >= 1");
    TrustLattice lattice{initial, params, stage, {}};
    lattice.points.reserve(static_cast<std::size_t>(stage));
    for (int k = 0; k < stage; ++k) {
        lattice.points.emplace_back(initial.alpha + params.w_s * k,
                                    initial.beta + params.w_f * (stage - 1 - k));
    }
    return lattice;
}

TrustState FinalTrustLine::at(double t) const {
    if (!(t >= 0.0) || !(t <= static_cast<double>(horizon)))
        throw std::invalid_argument("FinalTrustLine::at: parameter must lie in [0, horizon]");
    return TrustState(initial.alpha + params.w_s * t, initial.beta + params.w_f * (horizon - t));
}

FinalTrustLine final_trust_line(const TrustState& initial, const TrustParams& params, int horizon) {
    if (horizon < 1) throw std::invalid_argument("final_trust_line: horizon must be >= 1");
    return FinalTrustLine{initial, params, horizon};
}

bool contains_point(const FinalTrustLine& line, const TrustState& state, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("contains_point: tolerance must be >= 0");
    const double n = static_cast<double>(line.horizon);
    // Parameter intervals on which each coordinate matches within tol; the
    // point is on the segment iff they intersect inside [0, n].
    const double ta = (state.alpha - line.initial.alpha) / line.params.w_s;
    const double tb = n - (state.beta - line.initial.beta) / line.params.w_f;
    const double ra = tol / line.params.w_s;
    const double rb = tol / line.params.w_f;
    const double lo = std::max({ta - ra, tb - rb, 0.0});
    const double hi = std::min({ta + ra, tb + rb, n});
    return lo <= hi;
}

}
