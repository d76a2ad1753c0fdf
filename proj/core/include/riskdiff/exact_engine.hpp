#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riskdiff/prob_kernel.hpp"
#include "riskdiff/score_engine.hpp"

namespace riskdiff {

// Search policy for the supremum over the nuisance parameter: a uniform grid
// over the feasible P_C range, then golden-section refinement to width
// `refine_tol` around every grid-local maximum (endpoints included).
struct ExactOptions {
    int grid_points = 1001;
    double refine_tol = 1e-10;
};

// Exact unconditional p-value together with the certificate of how it was
// obtained: the maximising P_C and the search policy.
struct ExactPValue {
    double value;
    double argmax_p_c;
    int grid_points;
    double refine_tol;
    double boundary_delta;
};

// Outcomes at least as extreme as an observed one under the score ordering.
struct TailSet {
    std::vector<Outcome> outcomes;  // lexicographic order
    StatValue threshold;
};

struct NuisanceDomain {
    double lo;
    double hi;
};

// Feasible P_C values when P_T - P_C = delta. Throws DomainError unless
// -1 < delta < 1.
NuisanceDomain nuisance_domain(double delta);

// Score ordering of every outcome of a design at one boundary value delta.
// Both tail directions are precomputed; p-values for one outcome or for all
// outcomes share the same evaluation path and agree bit for bit.
class BoundaryOrdering {
public:
    BoundaryOrdering(const TrialDesign& design, double delta);

    const TrialDesign& design() const { return design_; }
    double delta() const { return delta_; }
    const OrderKey& key(std::size_t outcome_idx) const { return keys_[outcome_idx]; }

    // Outcome indices, most extreme first.
    std::span<const std::size_t> sorted(TailSide side) const;

    // Size of the tail of `outcome_idx`; the tail is the first
    // tail_length() entries of sorted(side).
    std::size_t tail_length(std::size_t outcome_idx, TailSide side) const;

    ExactPValue pvalue(std::size_t outcome_idx, TailSide side, const ExactOptions& options) const;

    // Indexed by outcome_index().
    std::vector<ExactPValue> pvalues_all(TailSide side, const ExactOptions& options) const;

private:
    std::vector<ExactPValue> evaluate(TailSide side, std::span<const std::size_t> lengths,
                                      const ExactOptions& options) const;

    TrialDesign design_;
    double delta_;
    std::vector<OrderKey> keys_;
    std::vector<std::size_t> sorted_large_;
    std::vector<std::size_t> sorted_small_;
    std::vector<std::size_t> length_large_;
    std::vector<std::size_t> length_small_;
};

TailSet tail_set(const TrialDesign& design, const Outcome& observed, double delta0,
                 TailSide side = TailSide::large_z);

// Sum of joint probabilities over the tail, accumulated in log space.
double tail_prob(const TrialDesign& design, const TailSet& tail, const JointModel& model);

// Chan's exact unconditional p-value for H0: d <= delta0 (side = large_z),
// or H0: d >= delta0 (side = small_z). The supremum is taken over the
// null boundary d = delta0 only.
ExactPValue exact_pvalue(const TrialDesign& design, const Outcome& observed, double delta0,
                         const ExactOptions& options = {}, TailSide side = TailSide::large_z);

// exact_pvalue for every outcome of the design, indexed by outcome_index().
std::vector<ExactPValue> exact_pvalues_all(const TrialDesign& design, double delta0,
                                           const ExactOptions& options = {},
                                           TailSide side = TailSide::large_z);

}  // namespace riskdiff
