#pragma once

#include <map>
#include <mutex>
#include <tuple>

#include "riskdiff/exact_engine.hpp"
#include "riskdiff/score_engine.hpp"

namespace riskdiff {

// Anchor of the exact-corrected statistic for one (design, outcome, margin).
//
// d_hat_0 = -margin + sigma_at_boundary * Phi^{-1}(1 - p_exact) is the
// observed difference that would make the one-sided score p-value at the
// boundary delta0 = -margin equal to the exact one.
struct EcCalibration {
    double d_hat_0;
    double margin;
    double p_exact;
    double sigma_at_boundary;

    double boundary_delta() const { return -margin; }
};

// p_exact values closer than this to 0 or 1 make the anchor undefined.
inline constexpr double kCalibrationClamp = 1e-15;

// Throws DomainError unless 0 < margin < 1, DegenerateCalibration when the
// exact p-value is within kCalibrationClamp of 0 or 1.
EcCalibration calibrate_ec(const TrialDesign& design, const Outcome& outcome, double margin,
                           const ExactOptions& options = {});

// (d_hat_0 - delta) / sigma_delta with the restricted-MLE standard error.
StatValue z_ec(const EcCalibration& calibration, const TrialDesign& design,
               const Outcome& outcome, double delta);

// Thread-safe memo of calibrate_ec keyed by (n_t, n_c, x_t, x_c, margin) and
// the exact search policy. Degenerate calibrations are not cached.
class CalibrationCache {
public:
    explicit CalibrationCache(ExactOptions options = {}) : options_(options) {}

    EcCalibration get(const TrialDesign& design, const Outcome& outcome, double margin);
    std::size_t size() const;
    const ExactOptions& options() const { return options_; }

private:
    using Key = std::tuple<int, int, int, int, double>;
    ExactOptions options_;
    mutable std::mutex mutex_;
    std::map<Key, EcCalibration> entries_;
};

enum class ExtremumKind { none, minimum, maximum };

// Location is reported in the noninferiority sign convention
// (ni_delta = -delta), matching how the search interval is given.
struct ZecExtremum {
    double ni_delta;
    double value;
    ExtremumKind kind;
};

// Scans z_ec over a uniform grid of ni_delta in [lo, hi] and refines the
// most prominent interior extremum by golden section to width `tol`.
// kind = none when the grid values are monotone.
ZecExtremum find_zec_extremum(const EcCalibration& calibration, const TrialDesign& design,
                              const Outcome& outcome, double ni_delta_lo,
                              double ni_delta_hi, int scan_points = 2001,
                              double tol = 1e-8);

}  // namespace riskdiff
