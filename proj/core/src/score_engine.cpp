#include "riskdiff/score_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskdiff/errors.hpp"

namespace riskdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StatValue ratio_stat(double numerator, double sigma) {
    if (sigma > 0.0) return {numerator / sigma, false};
    if (numerator > 0.0) return {kInf, true};
    if (numerator < 0.0) return {-kInf, true};
    return {0.0, true};
}

// d/dp of the log-likelihood along P_T = p + delta. Zero-count terms are
// dropped so boundary evaluations yield +/-inf rather than NaN.
struct ScoreFunction {
    double x_t, f_t, x_c, f_c, delta;

    double value(double p) const {
        const double pt = p + delta;
        double s = 0.0;
        if (x_t > 0) s += x_t / pt;
        if (f_t > 0) s -= f_t / (1.0 - pt);
        if (x_c > 0) s += x_c / p;
        if (f_c > 0) s -= f_c / (1.0 - p);
        return s;
    }

    double slope(double p) const {
        const double pt = p + delta;
        double s = 0.0;
        if (x_t > 0) s -= x_t / (pt * pt);
        if (f_t > 0) s -= f_t / ((1.0 - pt) * (1.0 - pt));
        if (x_c > 0) s -= x_c / (p * p);
        if (f_c > 0) s -= f_c / ((1.0 - p) * (1.0 - p));
        return s;
    }
};

// Root of a strictly decreasing function on (lo, hi) with value(lo) > 0 > value(hi).
double solve_decreasing(const ScoreFunction& f, double lo, double hi) {
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double s = f.value(x);
        if (s == 0.0) return x;
        if (s > 0.0) lo = x; else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return 0.5 * (lo + hi);

        const double slope = f.slope(x);
        double next = x - s / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (next == x) return x;
        x = next;
    }
    return x;
}

}  // namespace

double unrestricted_estimate(const TrialDesign& design, const Outcome& outcome) {
    check_outcome(design, outcome);
    return static_cast<double>(outcome.x_t) / design.n_t -
           static_cast<double>(outcome.x_c) / design.n_c;
}

RestrictedMle restricted_mle(const TrialDesign& design, const Outcome& outcome, double delta) {
    check_outcome(design, outcome);
    if (!(delta > -1.0 && delta < 1.0))
        throw DomainError("restricted_mle requires -1 < delta < 1, got " + std::to_string(delta));

    const ScoreFunction score{static_cast<double>(outcome.x_t),
                              static_cast<double>(design.n_t - outcome.x_t),
                              static_cast<double>(outcome.x_c),
                              static_cast<double>(design.n_c - outcome.x_c), delta};
    const double lo = std::max(0.0, -delta);
    const double hi = std::min(1.0, 1.0 - delta);

    double p_c;
    if (score.value(lo) <= 0.0) {
        p_c = lo;
    } else if (score.value(hi) >= 0.0) {
        p_c = hi;
    } else {
        p_c = solve_decreasing(score, lo, hi);
    }
    const double p_t = std::clamp(p_c + delta, 0.0, 1.0);
    const double sigma =
        std::sqrt(p_t * (1.0 - p_t) / design.n_t + p_c * (1.0 - p_c) / design.n_c);
    return {p_t, p_c, sigma, delta};
}

StatValue z_mee(const TrialDesign& design, const Outcome& outcome, double delta) {
    const RestrictedMle mle = restricted_mle(design, outcome, delta);
    return ratio_stat(unrestricted_estimate(design, outcome) - delta, mle.sigma);
}

double mn_factor(const TrialDesign& design) {
    const double n = design.total();
    return std::sqrt(n / (n - 1.0));
}

StatValue z_mn(const TrialDesign& design, const Outcome& outcome, double delta) {
    StatValue z = z_mee(design, outcome, delta);
    if (std::isfinite(z.value)) z.value *= mn_factor(design);
    return z;
}

StatValue z_wald(const TrialDesign& design, const Outcome& outcome, double delta) {
    check_outcome(design, outcome);
    const double p_t = static_cast<double>(outcome.x_t) / design.n_t;
    const double p_c = static_cast<double>(outcome.x_c) / design.n_c;
    const double s = std::sqrt(p_t * (1.0 - p_t) / design.n_t + p_c * (1.0 - p_c) / design.n_c);
    return ratio_stat((p_t - p_c) - delta, s);
}

double p_asy(const TrialDesign& design, const Outcome& outcome, double delta0) {
    return normal_sf(z_mee(design, outcome, delta0).value);
}

OrderKey order_key(const TrialDesign& design, const Outcome& outcome, double delta) {
    return {z_mee(design, outcome, delta).value, unrestricted_estimate(design, outcome)};
}

namespace {

// Orient keys so that "larger is more extreme" on either side.
OrderKey oriented(const OrderKey& k, TailSide side) {
    return side == TailSide::large_z ? k : OrderKey{-k.z, -k.d_hat};
}

double tie_slack(double z) { return kTieTolerance * std::max(1.0, std::abs(z)); }

}  // namespace

bool in_tail(const OrderKey& candidate, const OrderKey& observed, TailSide side) {
    const OrderKey y = oriented(candidate, side);
    const OrderKey o = oriented(observed, side);
    if (std::isfinite(o.z)) return y.z >= o.z - tie_slack(o.z);
    const double d_slack = kTieTolerance;
    if (o.z > 0) return y.z == kInf && y.d_hat >= o.d_hat - d_slack;
    return y.z > -kInf || y.d_hat >= o.d_hat - d_slack;
}

bool more_extreme(const OrderKey& a, const OrderKey& b, TailSide side) {
    const OrderKey x = oriented(a, side);
    const OrderKey y = oriented(b, side);
    if (x.z != y.z) return x.z > y.z;
    return x.d_hat > y.d_hat;
}

}  // namespace riskdiff
