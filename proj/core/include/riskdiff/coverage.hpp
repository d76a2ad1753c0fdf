#pragma once

#include <optional>
#include <vector>

#include "riskdiff/ci_engine.hpp"

namespace riskdiff {

struct CoverageOptions {
    CiOptions ci{};
    // Score ec coverage against the raw (possibly disconnected) acceptance
    // set instead of its hull.
    bool use_raw_components = false;
};

// Confidence sets for every outcome of a design, computed once.
//
// For ec, outcomes whose exact p-value makes the calibration degenerate get
// the Mee interval instead and are flagged in `fallback`.
class CiTable {
public:
    static CiTable build(Method method, const TrialDesign& design, double alpha,
                         std::optional<double> margin, const CiOptions& options = {});

    Method method() const { return method_; }
    const TrialDesign& design() const { return design_; }
    double alpha() const { return alpha_; }
    std::optional<double> margin() const { return margin_; }
    const ConfidenceSet& at(const Outcome& outcome) const {
        return sets_[outcome_index(design_, outcome)];
    }
    const std::vector<ConfidenceSet>& sets() const { return sets_; }
    const std::vector<bool>& fallback() const { return fallback_; }

private:
    CiTable(Method method, const TrialDesign& design, double alpha, std::optional<double> margin)
        : method_(method), design_(design), alpha_(alpha), margin_(margin) {}

    Method method_;
    TrialDesign design_;
    double alpha_;
    std::optional<double> margin_;
    std::vector<ConfidenceSet> sets_;
    std::vector<bool> fallback_;
};

struct CoverageCell {
    double p_t;
    double p_c;
    double coverage;
    double expected_width;
    Method method;
    double alpha;
    std::optional<double> margin;
    // Sum of the outcome probabilities that entered the cell (1 up to rounding).
    double total_mass;
    // Probability carried by outcomes whose set came from the ec fallback.
    double fallback_mass;
};

CoverageCell exact_coverage(const CiTable& table, double p_t, double p_c,
                            bool use_raw_components = false);

// Throws UsageError when method is ec and no margin is given.
CoverageCell exact_coverage(Method method, const TrialDesign& design, double p_t, double p_c,
                            double alpha, std::optional<double> margin,
                            const CoverageOptions& options = {});

struct CoverageSurface {
    std::vector<CoverageCell> cells;  // p_t outer, p_c inner
    double min_coverage;
    std::size_t argmin;               // index into cells, first minimum
    double mean_coverage;
    double mean_expected_width;
};

CoverageSurface coverage_surface(const CiTable& table, double p_grid_step,
                                 bool use_raw_components = false);

CoverageSurface coverage_surface(Method method, const TrialDesign& design, double p_grid_step,
                                 double alpha, std::optional<double> margin,
                                 const CoverageOptions& options = {});

}  // namespace riskdiff
