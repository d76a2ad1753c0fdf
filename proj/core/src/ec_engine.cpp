#include "riskdiff/ec_engine.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "riskdiff/errors.hpp"

namespace riskdiff {

EcCalibration calibrate_ec(const TrialDesign& design, const Outcome& outcome, double margin,
                           const ExactOptions& options) {
    if (!(margin > 0.0 && margin < 1.0))
        throw DomainError("noninferiority margin must lie in (0,1), got " +
                          std::to_string(margin));
    const double boundary = -margin;
    const ExactPValue exact = exact_pvalue(design, outcome, boundary, options);
    if (exact.value < kCalibrationClamp || exact.value > 1.0 - kCalibrationClamp)
        throw DegenerateCalibration("exact p-value " + std::to_string(exact.value) +
                                    " leaves the EC anchor undefined");
    const double sigma = restricted_mle(design, outcome, boundary).sigma;
    return {boundary + sigma * normal_upper_quantile(exact.value), margin, exact.value, sigma};
}

StatValue z_ec(const EcCalibration& calibration, const TrialDesign& design,
               const Outcome& outcome, double delta) {
    const double sigma = restricted_mle(design, outcome, delta).sigma;
    const double numerator = calibration.d_hat_0 - delta;
    if (sigma > 0.0) return {numerator / sigma, false};
    if (numerator > 0.0) return {std::numeric_limits<double>::infinity(), true};
    if (numerator < 0.0) return {-std::numeric_limits<double>::infinity(), true};
    return {0.0, true};
}

EcCalibration CalibrationCache::get(const TrialDesign& design, const Outcome& outcome,
                                    double margin) {
    const Key key{design.n_t, design.n_c, outcome.x_t, outcome.x_c, margin};
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    const EcCalibration fresh = calibrate_ec(design, outcome, margin, options_);
    std::lock_guard lock(mutex_);
    return entries_.try_emplace(key, fresh).first->second;
}

std::size_t CalibrationCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

ZecExtremum find_zec_extremum(const EcCalibration& calibration, const TrialDesign& design,
                              const Outcome& outcome, double ni_delta_lo,
                              double ni_delta_hi, int scan_points, double tol) {
    if (!(ni_delta_lo > -1.0 && ni_delta_hi < 1.0 && ni_delta_lo < ni_delta_hi))
        throw DomainError("extremum search interval must be an ordered subset of (-1,1)");
    if (scan_points < 3) throw DomainError("extremum scan needs at least 3 points");

    auto z = [&](double ni_delta) {
        return z_ec(calibration, design, outcome, -ni_delta).value;
    };
    const auto n = static_cast<std::size_t>(scan_points);
    std::vector<double> xs(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = i + 1 == n ? ni_delta_hi
                           : ni_delta_lo + (ni_delta_hi - ni_delta_lo) *
                                                  static_cast<double>(i) / static_cast<double>(n - 1);
        zs[i] = z(xs[i]);
    }

    // Prominence of an interior extremum: the smaller of the rises to the
    // ends of the monotone runs on either side.
    std::size_t best_i = 0;
    double best_prominence = -1.0;
    ExtremumKind best_kind = ExtremumKind::none;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool is_min = zs[i] < zs[i - 1] && zs[i] <= zs[i + 1];
        const bool is_max = zs[i] > zs[i - 1] && zs[i] >= zs[i + 1];
        if (!is_min && !is_max) continue;
        const double sign = is_min ? 1.0 : -1.0;
        std::size_t l = i;
        while (l > 0 && sign * (zs[l - 1] - zs[l]) >= 0.0) --l;
        std::size_t r = i;
        while (r + 1 < n && sign * (zs[r + 1] - zs[r]) >= 0.0) ++r;
        const double prominence = std::min(sign * (zs[l] - zs[i]), sign * (zs[r] - zs[i]));
        if (prominence > best_prominence) {
            best_prominence = prominence;
            best_i = i;
            best_kind = is_min ? ExtremumKind::minimum : ExtremumKind::maximum;
        }
    }
    if (best_kind == ExtremumKind::none) return {std::nan(""), std::nan(""), ExtremumKind::none};

    // Golden section on sign * z (minimisation).
    const double sign = best_kind == ExtremumKind::minimum ? 1.0 : -1.0;
    auto f = [&](double x) { return sign * z(x); };
    constexpr double kInvGolden = 0.6180339887498949;
    double a = xs[best_i - 1], b = xs[best_i + 1];
    double c = b - kInvGolden * (b - a), d = a + kInvGolden * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc <= fd) {
            b = d; d = c; fd = fc;
            c = b - kInvGolden * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + kInvGolden * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, z(x), best_kind};
}

}  // namespace riskdiff
