#pragma once

#include <stdexcept>
#include <vector>

namespace trustshape {

/// Experience gains applied to the trust state on success and on failure.
struct TrustParams {
    double w_s;
    double w_f;

    explicit TrustParams(double ws = 1.0, double wf = 1.0) : w_s(ws), w_f(wf) {
        if (!(w_s > 0.0) || !(w_f > 0.0))
            throw std::invalid_argument("TrustParams: gains w_s and w_f must be positive");
    }

    friend bool operator==(const TrustParams&, const TrustParams&) = default;
};

/// Beta-distributed trust over performance history. Both pseudo-counts stay
/// at or above 1, so the density is unimodal for every reachable state.
struct TrustState {
    double alpha;
    double beta;

    TrustState(double a = 1.0, double b = 1.0) : alpha(a), beta(b) {
        if (!(alpha >= 1.0) || !(beta >= 1.0))
            throw std::invalid_argument("TrustState: alpha and beta must be >= 1");
    }

    friend bool operator==(const TrustState&, const TrustState&) = default;
};

/// Posterior update after observing performance p in [0, 1]:
/// (alpha + w_s * p, beta + w_f * (1 - p)).
TrustState update_trust(const TrustState& state, double performance, const TrustParams& params);

/// Mean of the trust distribution, alpha / (alpha + beta).
double expected_trust(const TrustState& state);

/// States reachable at a given 1-based stage from a fixed initial state under
/// binary performance. Index k counts successes: stage n holds n points
/// (alpha_1 + w_s * k, beta_1 + w_f * (n - 1 - k)) for k = 0..n-1.
struct TrustLattice {
    TrustState initial;
    TrustParams params;
    int stage = 1;
    std::vector<TrustState> points;
};

TrustLattice reachable_lattice(const TrustState& initial, const TrustParams& params, int stage);

/// Segment carrying every possible end-of-horizon trust state when the
/// performance total is allowed to vary continuously:
/// t in [0, N] -> (alpha_1 + w_s * t, beta_1 + w_f * (N - t)).
struct FinalTrustLine {
    TrustState initial;
    TrustParams params;
    int horizon = 1;

    TrustState at(double t) const;
    TrustState start() const { return at(0.0); }
    TrustState end() const { return at(static_cast<double>(horizon)); }
};

FinalTrustLine final_trust_line(const TrustState& initial, const TrustParams& params, int horizon);

/// Whether a state lies on the segment within coordinate tolerance tol.
bool contains_point(const FinalTrustLine& line, const TrustState& state, double tol);

}
