#include "riskdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskdiff/errors.hpp"
#include "riskdiff/parallel.hpp"

namespace riskdiff {

namespace {

std::vector<double> sorted_copy(std::span<const double> grid) {
    std::vector<double> out(grid.begin(), grid.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
}

// Slack by which a zec triple is a strict interior extremum (negative when
// it is not).
double triple_slack(double z1, double z2, double z3) {
    return std::max(std::min(z1, z3) - z2, z2 - std::max(z1, z3));
}

void append_pexact_certificates(const TrialDesign& design, const Outcome& outcome,
                                std::span<const double> grid, std::span<const double> p,
                                std::vector<ViolationCertificate>& out) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (p[i] - p[i + 1] > kDiagnosticTolerance)
            out.push_back({ViolationKind::pexact_nonmonotone, design, outcome,
                           {{"delta0", grid[i], p[i]}, {"delta0", grid[i + 1], p[i + 1]}},
                           kDiagnosticTolerance, std::nullopt, std::nullopt, std::nullopt});
    }
}

bool set_member(const ConfidenceSet& set, double delta) {
    if (set.empty()) return false;
    return set.method == Method::cz_exact ? set.hull.contains(delta) : set.contains(delta);
}

double distance_to_set(const ConfidenceSet& set, double delta) {
    if (set.empty()) return std::numeric_limits<double>::infinity();
    if (set.method == Method::cz_exact) {
        if (set.hull.contains(delta)) return 0.0;
        return std::min(std::abs(delta - set.hull.lower), std::abs(delta - set.hull.upper));
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : set.components) {
        if (c.contains(delta)) return 0.0;
        best = std::min({best, std::abs(delta - c.lower), std::abs(delta - c.upper)});
    }
    return best;
}

}  // namespace

std::string_view kind_name(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::zec_nonmonotone: return "zec_nonmonotone";
        case ViolationKind::pexact_nonmonotone: return "pexact_nonmonotone";
        case ViolationKind::margin_incoherence: return "margin_incoherence";
        case ViolationKind::nesting_failure: return "nesting_failure";
    }
    return "unknown";
}

std::vector<double> step_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw DomainError("step_grid requires step > 0 and hi >= lo");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) grid.push_back(lo + step * static_cast<double>(i));
    return grid;
}

std::vector<ViolationCertificate> scan_zec_monotonicity(const TrialDesign& design,
                                                        const Outcome& outcome, double margin,
                                                        std::span<const double> ni_delta_grid,
                                                        const ExactOptions& options) {
    const EcCalibration cal = calibrate_ec(design, outcome, margin, options);
    const auto grid = sorted_copy(ni_delta_grid);
    std::vector<double> z(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) z[i] = z_ec(cal, design, outcome, -grid[i]).value;

    std::vector<ViolationCertificate> out;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        if (triple_slack(z[i - 1], z[i], z[i + 1]) > kDiagnosticTolerance)
            out.push_back({ViolationKind::zec_nonmonotone, design, outcome,
                           {{"ni_delta", grid[i - 1], z[i - 1]},
                            {"ni_delta", grid[i], z[i]},
                            {"ni_delta", grid[i + 1], z[i + 1]}},
                           kDiagnosticTolerance, margin, std::nullopt, std::nullopt});
    }
    return out;
}

std::vector<ViolationCertificate> scan_pexact_monotonicity(const TrialDesign& design,
                                                           const Outcome& outcome,
                                                           std::span<const double> delta0_grid,
                                                           const ExactOptions& options) {
    check_outcome(design, outcome);
    const auto grid = sorted_copy(delta0_grid);
    std::vector<double> p(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        p[i] = exact_pvalue(design, outcome, grid[i], options).value;
    std::vector<ViolationCertificate> out;
    append_pexact_certificates(design, outcome, grid, p, out);
    return out;
}

std::vector<ViolationCertificate> scan_pexact_monotonicity_all(const TrialDesign& design,
                                                               std::span<const double> delta0_grid,
                                                               const ExactOptions& options,
                                                               unsigned threads) {
    const auto grid = sorted_copy(delta0_grid);
    const std::size_t k = design.outcome_count();
    std::vector<double> p(grid.size() * k);  // p[o * grid + i]
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const auto all = exact_pvalues_all(design, grid[i], options);
        for (std::size_t o = 0; o < k; ++o) p[o * grid.size() + i] = all[o].value;
    });
    std::vector<ViolationCertificate> out;
    const auto outcomes = enumerate_outcomes(design);
    for (std::size_t o = 0; o < k; ++o)
        append_pexact_certificates(design, outcomes[o], grid,
                                   std::span<const double>(p).subspan(o * grid.size(), grid.size()),
                                   out);
    return out;
}

std::vector<ViolationCertificate> scan_margin_coherence(const TrialDesign& design,
                                                        const Outcome& outcome, double alpha,
                                                        std::span<const double> margin_grid,
                                                        const ExactOptions& options) {
    check_alpha(alpha);
    check_outcome(design, outcome);
    const auto margins = sorted_copy(margin_grid);
    for (double m : margins)
        if (!(m > 0.0 && m < 1.0)) throw DomainError("margins must lie in (0,1)");
    const double half = 0.5 * alpha;
    std::vector<double> p(margins.size());
    for (std::size_t i = 0; i < margins.size(); ++i)
        p[i] = exact_pvalue(design, outcome, -margins[i], options).value;

    std::vector<ViolationCertificate> out;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        if (!(p[i] < half - kDiagnosticTolerance)) continue;
        for (std::size_t j = i + 1; j < margins.size(); ++j) {
            if (p[j] >= half)
                out.push_back({ViolationKind::margin_incoherence, design, outcome,
                               {{"margin", margins[i], p[i]}, {"margin", margins[j], p[j]}},
                               kDiagnosticTolerance, std::nullopt, alpha, std::nullopt});
        }
    }
    return out;
}

std::vector<ViolationCertificate> scan_ci_nesting(
    Method method, const TrialDesign& design, const Outcome& outcome,
    std::optional<double> margin, std::span<const std::pair<double, double>> alpha_pairs,
    const CiOptions& options) {
    std::vector<ViolationCertificate> out;
    for (const auto& [alpha_hi, alpha_lo] : alpha_pairs) {
        check_alpha(alpha_hi);
        check_alpha(alpha_lo);
        if (!(alpha_hi > alpha_lo)) throw DomainError("alpha pairs must satisfy alpha_hi > alpha_lo");
        const ConfidenceSet wide_alpha = confidence_set(method, design, outcome, alpha_hi, margin, options);
        const ConfidenceSet narrow_alpha = confidence_set(method, design, outcome, alpha_lo, margin, options);

        std::vector<double> candidates;
        for (const ConfidenceSet* s : {&wide_alpha, &narrow_alpha}) {
            for (const auto& c : s->components) {
                candidates.push_back(c.lower);
                candidates.push_back(c.upper);
                candidates.push_back(0.5 * (c.lower + c.upper));
            }
        }
        for (int i = 0; i < options.scan_points; ++i)
            candidates.push_back(-1.0 + kBoundaryEps +
                                 (2.0 - 2.0 * kBoundaryEps) * i / std::max(1, options.scan_points - 1));
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        for (double delta : candidates) {
            if (!set_member(wide_alpha, delta)) continue;
            const double gap = distance_to_set(narrow_alpha, delta);
            if (gap > kDiagnosticTolerance)
                out.push_back({ViolationKind::nesting_failure, design, outcome,
                               {{"alpha", alpha_hi, 1.0}, {"alpha", alpha_lo, 0.0},
                                {"delta", delta, gap}},
                               kDiagnosticTolerance, margin, std::nullopt, method});
        }
    }
    return out;
}

bool verify_certificate(const ViolationCertificate& cert, const CiOptions& options) {
    const double tol = cert.tolerance_used;
    const auto& w = cert.witness;
    switch (cert.kind) {
        case ViolationKind::zec_nonmonotone: {
            if (w.size() != 3 || !cert.margin) return false;
            const EcCalibration cal = calibrate_ec(cert.design, cert.outcome, *cert.margin, options.exact);
            double z[3];
            for (int i = 0; i < 3; ++i) z[i] = z_ec(cal, cert.design, cert.outcome, -w[i].x).value;
            return w[0].x < w[1].x && w[1].x < w[2].x && triple_slack(z[0], z[1], z[2]) >= tol;
        }
        case ViolationKind::pexact_nonmonotone: {
            if (w.size() != 2 || !(w[0].x < w[1].x)) return false;
            const double p0 = exact_pvalue(cert.design, cert.outcome, w[0].x, options.exact).value;
            const double p1 = exact_pvalue(cert.design, cert.outcome, w[1].x, options.exact).value;
            return p0 - p1 >= tol;
        }
        case ViolationKind::margin_incoherence: {
            if (w.size() != 2 || !cert.alpha || !(w[0].x < w[1].x)) return false;
            const double half = 0.5 * *cert.alpha;
            const double p_small = exact_pvalue(cert.design, cert.outcome, -w[0].x, options.exact).value;
            const double p_large = exact_pvalue(cert.design, cert.outcome, -w[1].x, options.exact).value;
            return half - p_small >= tol && p_large >= half;
        }
        case ViolationKind::nesting_failure: {
            if (w.size() != 3 || !cert.method) return false;
            const ConfidenceSet wide_alpha =
                confidence_set(*cert.method, cert.design, cert.outcome, w[0].x, cert.margin, options);
            const ConfidenceSet narrow_alpha =
                confidence_set(*cert.method, cert.design, cert.outcome, w[1].x, cert.margin, options);
            return set_member(wide_alpha, w[2].x) && distance_to_set(narrow_alpha, w[2].x) >= tol;
        }
    }
    return false;
}

LiberalMap liberal_conservative_map(const TrialDesign& design, double delta0,
                                    const ExactOptions& options) {
    const auto exact = exact_pvalues_all(design, delta0, options);
    LiberalMap map{design, delta0, {}};
    const auto outcomes = enumerate_outcomes(design);
    map.rows.reserve(outcomes.size());
    for (std::size_t o = 0; o < outcomes.size(); ++o) {
        const double pa = p_asy(design, outcomes[o], delta0);
        const double pe = exact[o].value;
        const int relation = std::abs(pa - pe) <= 1e-12 ? 0 : (pa < pe ? -1 : 1);
        map.rows.push_back({outcomes[o], pa, pe, relation});
        if (relation < 0) ++map.liberal;
        else if (relation > 0) ++map.conservative;
        else ++map.equal;
    }
    return map;
}

}  // namespace riskdiff
