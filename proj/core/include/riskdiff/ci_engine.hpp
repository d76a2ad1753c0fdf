#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "riskdiff/ec_engine.hpp"
#include "riskdiff/exact_engine.hpp"
#include "riskdiff/prob_kernel.hpp"

namespace riskdiff {

enum class Method { wald, mee, mn, cz_exact, ec };

std::string_view method_name(Method method);
// Accepts the canonical names plus "cz" and "chan" for cz_exact.
std::optional<Method> parse_method(std::string_view name);

struct Interval {
    double lower;
    double upper;

    bool contains(double x) const { return x >= lower && x <= upper; }
    double width() const { return upper - lower; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

// Confidence set for the risk difference obtained by inverting a test.
// `components` is the raw acceptance set as disjoint closed intervals in
// increasing order; `hull` spans them (the gap-filled interval) and `gaps`
// are the open holes in between. An empty set has no components and a NaN
// hull.
struct ConfidenceSet {
    Method method;
    double alpha;
    std::vector<Interval> components;
    Interval hull;
    std::vector<Interval> gaps;
    std::optional<double> margin;
    // EC only: whether "-margin lies below the whole set" agrees with
    // p_exact < alpha/2.
    std::optional<bool> margin_consistent;

    bool empty() const { return components.empty(); }
    bool contains(double delta) const;
    bool connected() const { return components.size() == 1; }
    friend bool operator==(const ConfidenceSet&, const ConfidenceSet&) = default;
};

// Scans never evaluate a statistic at |delta| = 1; they stop this far short.
inline constexpr double kBoundaryEps = 1e-9;

struct CiOptions {
    ExactOptions exact{};
    int scan_points = 4001;
    double bisect_tol = 1e-9;
    unsigned threads = 1;
};

// z_{1 - alpha/2}. Throws DomainError unless 0 < alpha < 1.
double critical_value(double alpha);

// Builds hull and gaps from ordered disjoint components.
ConfidenceSet make_confidence_set(Method method, double alpha, std::vector<Interval> components,
                                  std::optional<double> margin = std::nullopt);

// Wald (closed form), Mee or MN (scan + bisection on |Z| < z_{1-alpha/2}).
ConfidenceSet invert_asymptotic(Method method, const TrialDesign& design, const Outcome& outcome,
                                double alpha, const CiOptions& options = {});

// Acceptance of delta by the two one-sided exact tests at level alpha/2.
bool cz_accepts(const TrialDesign& design, const Outcome& outcome, double delta, double alpha,
                const ExactOptions& options = {});

// Raw acceptance set of the two one-sided Chan tests, plus its gap-filled
// hull.
ConfidenceSet invert_cz_exact(const TrialDesign& design, const Outcome& outcome, double alpha,
                              const CiOptions& options = {});

// invert_cz_exact for every outcome (indexed by outcome_index), sharing the
// score ordering and nuisance search across outcomes at each scan point.
// Each entry equals the single-outcome result exactly.
std::vector<ConfidenceSet> invert_cz_exact_all(const TrialDesign& design, double alpha,
                                               const CiOptions& options = {});

// Acceptance set {delta : |z_ec(delta)| < z_{1-alpha/2}}. May be disconnected.
ConfidenceSet invert_ec(const EcCalibration& calibration, const TrialDesign& design,
                        const Outcome& outcome, double alpha, const CiOptions& options = {});
ConfidenceSet invert_ec(const TrialDesign& design, const Outcome& outcome, double margin,
                        double alpha, const CiOptions& options = {});

// Dispatch on method. `margin` is required for ec and ignored otherwise.
ConfidenceSet confidence_set(Method method, const TrialDesign& design, const Outcome& outcome,
                             double alpha, std::optional<double> margin,
                             const CiOptions& options = {});

struct NoninferiorityDecision {
    bool reject;
    double p_used;
};

// Noninferiority test of H0: d <= -margin read off the method's confidence
// set: reject when -margin lies below the whole set. p_used is the method's
// own one-sided p-value at the margin (p_exact for cz_exact and ec).
NoninferiorityDecision noninferiority_decision(Method method, const TrialDesign& design,
                                               const Outcome& outcome, double margin,
                                               double alpha, const CiOptions& options = {});

}  // namespace riskdiff
