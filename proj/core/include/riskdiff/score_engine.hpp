#pragma once

#include "riskdiff/prob_kernel.hpp"

namespace riskdiff {

// Constrained maximum likelihood estimates of (P_T, P_C) subject to
// P_T - P_C = delta, and the score standard error built from them.
struct RestrictedMle {
    double p_t;
    double p_c;
    double sigma;
    double delta;
};

// Test statistic on the extended real line. `degenerate` is set when the
// standard error in the denominator is exactly zero; the value is then
// +inf / -inf / 0 according to the sign of the numerator.
struct StatValue {
    double value;
    bool degenerate;
};

// x_t/n_t - x_c/n_c.
double unrestricted_estimate(const TrialDesign& design, const Outcome& outcome);

// Maximises the product-binomial log-likelihood along P_T = P_C + delta with
// P_C in [max(0,-delta), min(1,1-delta)]. The likelihood is concave in P_C,
// so the maximiser is the unique root of the score equation (or an endpoint);
// it is located by Newton iteration safeguarded by bisection.
// Throws DomainError unless -1 < delta < 1.
RestrictedMle restricted_mle(const TrialDesign& design, const Outcome& outcome, double delta);

// Score statistic (d_hat - delta) / sigma_delta with the restricted-MLE
// standard error. Strictly decreasing in delta.
StatValue z_mee(const TrialDesign& design, const Outcome& outcome, double delta);

// sqrt(N/(N-1)) * z_mee, N = n_t + n_c.
StatValue z_mn(const TrialDesign& design, const Outcome& outcome, double delta);

// (d_hat - delta) / s with the unconstrained per-arm variance estimate.
StatValue z_wald(const TrialDesign& design, const Outcome& outcome, double delta);

double mn_factor(const TrialDesign& design);

// One-sided asymptotic p-value 1 - Phi(z_mee) for H0: d <= delta0.
double p_asy(const TrialDesign& design, const Outcome& outcome, double delta0);

// --- outcome ordering -------------------------------------------------------

// Which end of the score ordering counts as "at least as extreme".
// large_z: evidence against H0: d <= delta (the noninferiority direction).
// small_z: evidence against H0: d >= delta.
enum class TailSide { large_z, small_z };

// Sort key for the total order on outcomes: z_mee first; +/-inf values are
// split by d_hat. Outcomes whose keys tie are all members of each other's
// tails.
struct OrderKey {
    double z;
    double d_hat;
};

// Relative slack under which two finite statistics count as tied.
inline constexpr double kTieTolerance = 1e-10;

OrderKey order_key(const TrialDesign& design, const Outcome& outcome, double delta);

// True when `candidate` is at least as extreme as `observed` on `side`.
bool in_tail(const OrderKey& candidate, const OrderKey& observed, TailSide side);

// Strict ordering consistent with in_tail: sorting by `more_extreme`
// makes every tail a prefix.
bool more_extreme(const OrderKey& a, const OrderKey& b, TailSide side);

}  // namespace riskdiff
