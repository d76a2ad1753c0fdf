#pragma once

// Reference implementations used only by the tests. They deliberately avoid
// the library's numerical paths: long-double arithmetic, golden-section
// likelihood maximisation instead of the score equation, series/continued
// fraction normal CDF instead of std::erfc, and brute-force nuisance grids.

#include <cstddef>
#include <vector>

#include "riskdiff/exact_engine.hpp"
#include "riskdiff/prob_kernel.hpp"

namespace oracle {

// Standard normal CDF from the Taylor series of erf (|z| <= 3) or the
// Laplace continued fraction of erfc (|z| > 3), in long double.
long double normal_cdf(long double z);

// Root of normal_cdf(z) = q by bisection.
long double normal_quantile(long double q);

// argmax over P_C of the constrained product-binomial log-likelihood by
// golden-section search in long double.
long double restricted_p_c(const riskdiff::TrialDesign& design, const riskdiff::Outcome& outcome,
                           double delta);

// For every outcome (indexed by outcome_index): max over P_C on a uniform
// grid of spacing `step` of the probability of its tail, using the tails
// defined by `ordering`. Binomial pmfs by repeated multiplication.
std::vector<double> brute_exact_pvalues(const riskdiff::BoundaryOrdering& ordering,
                                        riskdiff::TailSide side, double step);

}  // namespace oracle
