#include "riskdiff/ci_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "riskdiff/errors.hpp"
#include "riskdiff/parallel.hpp"
#include "riskdiff/score_engine.hpp"

namespace riskdiff {

namespace {

constexpr double kLo = -1.0 + kBoundaryEps;
constexpr double kHi = 1.0 - kBoundaryEps;
constexpr double kInvGolden = 0.6180339887498949;

using Predicate = std::function<bool(double)>;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
}

void check_scan(const CiOptions& options) {
    if (options.scan_points < 2) throw DomainError("scan_points must be at least 2");
    if (!(options.bisect_tol > 0.0)) throw DomainError("bisect_tol must be positive");
}

std::vector<double> uniform_grid(int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[i] = i + 1 == points ? kHi : kLo + (kHi - kLo) * i / (points - 1.0);
    return grid;
}

double clamp_inside(double delta) { return std::clamp(delta, kLo, kHi); }

struct Probe {
    double delta;
    bool accepted;
};

void sort_probes(std::vector<Probe>& probes) {
    std::sort(probes.begin(), probes.end(),
              [](const Probe& a, const Probe& b) { return a.delta < b.delta; });
    probes.erase(std::unique(probes.begin(), probes.end(),
                             [](const Probe& a, const Probe& b) { return a.delta == b.delta; }),
                 probes.end());
}

// Refines every accepted/rejected transition between adjacent probes by
// bisection and returns the accepted runs as closed intervals. A run that is
// still accepted at the outermost scan point is closed at +/-1: the scan
// stops short of the parameter boundary only because the statistics are
// undefined there.
std::vector<Interval> assemble(const std::vector<Probe>& probes, const Predicate& accept,
                               double tol) {
    auto edge = [&](double inside, double outside) {
        while (std::abs(outside - inside) > tol) {
            const double mid = 0.5 * (inside + outside);
            if (accept(mid)) inside = mid; else outside = mid;
        }
        return inside;
    };

    std::vector<Interval> components;
    std::size_t i = 0;
    while (i < probes.size()) {
        if (!probes[i].accepted) { ++i; continue; }
        std::size_t j = i;
        while (j + 1 < probes.size() && probes[j + 1].accepted) ++j;
        const double lower = i == 0 ? (probes[i].delta <= kLo ? -1.0 : probes[i].delta)
                                    : edge(probes[i].delta, probes[i - 1].delta);
        const double upper = j + 1 == probes.size()
                                 ? (probes[j].delta >= kHi ? 1.0 : probes[j].delta)
                                 : edge(probes[j].delta, probes[j + 1].delta);
        components.push_back({lower, upper});
        i = j + 1;
    }
    return components;
}

// Adds a probe at the minimum of |z| inside every grid cell pair where the
// grid shows a local minimum above the threshold, so that narrow acceptance
// windows between two rejected probes are not missed.
void add_minimum_probes(std::vector<Probe>& probes, const std::function<double(double)>& abs_z,
                        double critical, double tol) {
    std::vector<double> g(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i) g[i] = abs_z(probes[i].delta);
    std::vector<Probe> extra;
    for (std::size_t i = 1; i + 1 < probes.size(); ++i) {
        if (probes[i].accepted || !(g[i] <= g[i - 1] && g[i] <= g[i + 1])) continue;
        double a = probes[i - 1].delta, b = probes[i + 1].delta;
        double c = b - kInvGolden * (b - a), d = a + kInvGolden * (b - a);
        double fc = abs_z(c), fd = abs_z(d);
        while (b - a > tol) {
            if (fc <= fd) {
                b = d; d = c; fd = fc;
                c = b - kInvGolden * (b - a);
                fc = abs_z(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + kInvGolden * (b - a);
                fd = abs_z(d);
            }
        }
        const double x = fc <= fd ? c : d;
        if (std::min(fc, fd) < critical) extra.push_back({x, true});
    }
    probes.insert(probes.end(), extra.begin(), extra.end());
    sort_probes(probes);
}

ConfidenceSet invert_by_statistic(Method method, const std::function<double(double)>& stat,
                                  double alpha, std::vector<double> extra_points,
                                  const CiOptions& options, std::optional<double> margin) {
    check_scan(options);
    const double critical = critical_value(alpha);
    auto abs_z = [&](double delta) { return std::abs(stat(delta)); };
    const Predicate accept = [&](double delta) { return abs_z(delta) < critical; };

    std::vector<double> grid = uniform_grid(options.scan_points);
    for (double x : extra_points) grid.push_back(clamp_inside(x));
    std::vector<Probe> probes(grid.size());
    parallel_for(grid.size(), options.threads,
                 [&](std::size_t i) { probes[i] = {grid[i], accept(grid[i])}; });
    sort_probes(probes);
    add_minimum_probes(probes, abs_z, critical, options.bisect_tol);
    return make_confidence_set(method, alpha, assemble(probes, accept, options.bisect_tol), margin);
}

bool cz_accepts_at(const BoundaryOrdering& ordering, std::size_t idx, double alpha,
                   const ExactOptions& options) {
    const double half = 0.5 * alpha;
    if (ordering.pvalue(idx, TailSide::large_z, options).value < half) return false;
    return ordering.pvalue(idx, TailSide::small_z, options).value >= half;
}

ConfidenceSet assemble_cz(const TrialDesign& design, const Outcome& outcome, double alpha,
                          std::vector<Probe> probes, const CiOptions& options) {
    const Predicate accept = [&](double delta) {
        return cz_accepts(design, outcome, delta, alpha, options.exact);
    };
    const double d_hat = clamp_inside(unrestricted_estimate(design, outcome));
    probes.push_back({d_hat, accept(d_hat)});
    sort_probes(probes);
    return make_confidence_set(Method::cz_exact, alpha,
                               assemble(probes, accept, options.bisect_tol));
}

}  // namespace

std::string_view method_name(Method method) {
    switch (method) {
        case Method::wald: return "wald";
        case Method::mee: return "mee";
        case Method::mn: return "mn";
        case Method::cz_exact: return "cz_exact";
        case Method::ec: return "ec";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    if (name == "wald") return Method::wald;
    if (name == "mee") return Method::mee;
    if (name == "mn") return Method::mn;
    if (name == "cz_exact" || name == "cz" || name == "chan") return Method::cz_exact;
    if (name == "ec") return Method::ec;
    return std::nullopt;
}

bool ConfidenceSet::contains(double delta) const {
    return std::any_of(components.begin(), components.end(),
                       [delta](const Interval& c) { return c.contains(delta); });
}

double critical_value(double alpha) {
    check_alpha(alpha);
    return normal_upper_quantile(0.5 * alpha);
}

ConfidenceSet make_confidence_set(Method method, double alpha, std::vector<Interval> components,
                                  std::optional<double> margin) {
    ConfidenceSet set{method, alpha, std::move(components), {}, {}, margin, std::nullopt};
    if (set.components.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        set.hull = {nan, nan};
        return set;
    }
    set.hull = {set.components.front().lower, set.components.back().upper};
    for (std::size_t i = 1; i < set.components.size(); ++i)
        set.gaps.push_back({set.components[i - 1].upper, set.components[i].lower});
    return set;
}

ConfidenceSet invert_asymptotic(Method method, const TrialDesign& design, const Outcome& outcome,
                                double alpha, const CiOptions& options) {
    check_outcome(design, outcome);
    const double critical = critical_value(alpha);
    const double d_hat = unrestricted_estimate(design, outcome);
    switch (method) {
        case Method::wald: {
            const double p_t = static_cast<double>(outcome.x_t) / design.n_t;
            const double p_c = static_cast<double>(outcome.x_c) / design.n_c;
            const double s =
                std::sqrt(p_t * (1.0 - p_t) / design.n_t + p_c * (1.0 - p_c) / design.n_c);
            return make_confidence_set(method, alpha,
                                       {{std::max(-1.0, d_hat - critical * s),
                                         std::min(1.0, d_hat + critical * s)}});
        }
        case Method::mee:
            return invert_by_statistic(
                method, [&](double d) { return z_mee(design, outcome, d).value; }, alpha, {d_hat},
                options, std::nullopt);
        case Method::mn:
            return invert_by_statistic(
                method, [&](double d) { return z_mn(design, outcome, d).value; }, alpha, {d_hat},
                options, std::nullopt);
        default:
            throw UsageError("invert_asymptotic handles wald, mee and mn only");
    }
}

bool cz_accepts(const TrialDesign& design, const Outcome& outcome, double delta, double alpha,
                const ExactOptions& options) {
    check_alpha(alpha);
    check_outcome(design, outcome);
    const BoundaryOrdering ordering(design, delta);
    return cz_accepts_at(ordering, outcome_index(design, outcome), alpha, options);
}

ConfidenceSet invert_cz_exact(const TrialDesign& design, const Outcome& outcome, double alpha,
                              const CiOptions& options) {
    check_alpha(alpha);
    check_outcome(design, outcome);
    check_scan(options);
    const auto grid = uniform_grid(options.scan_points);
    std::vector<Probe> probes(grid.size());
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
        probes[i] = {grid[i], cz_accepts(design, outcome, grid[i], alpha, options.exact)};
    });
    return assemble_cz(design, outcome, alpha, std::move(probes), options);
}

std::vector<ConfidenceSet> invert_cz_exact_all(const TrialDesign& design, double alpha,
                                               const CiOptions& options) {
    check_alpha(alpha);
    check_scan(options);
    const auto grid = uniform_grid(options.scan_points);
    const std::size_t k = design.outcome_count();
    const double half = 0.5 * alpha;

    // accepted[i * k + outcome]
    std::vector<char> accepted(grid.size() * k);
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
        const BoundaryOrdering ordering(design, grid[i]);
        const auto lower = ordering.pvalues_all(TailSide::large_z, options.exact);
        const auto upper = ordering.pvalues_all(TailSide::small_z, options.exact);
        for (std::size_t o = 0; o < k; ++o)
            accepted[i * k + o] = lower[o].value >= half && upper[o].value >= half;
    });

    const auto outcomes = enumerate_outcomes(design);
    std::vector<ConfidenceSet> sets(k);
    parallel_for(k, options.threads, [&](std::size_t o) {
        std::vector<Probe> probes(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            probes[i] = {grid[i], accepted[i * k + o] != 0};
        CiOptions serial = options;
        serial.threads = 1;
        sets[o] = assemble_cz(design, outcomes[o], alpha, std::move(probes), serial);
    });
    return sets;
}

ConfidenceSet invert_ec(const EcCalibration& calibration, const TrialDesign& design,
                        const Outcome& outcome, double alpha, const CiOptions& options) {
    check_outcome(design, outcome);
    ConfidenceSet set = invert_by_statistic(
        Method::ec, [&](double d) { return z_ec(calibration, design, outcome, d).value; }, alpha,
        {calibration.d_hat_0, calibration.boundary_delta()}, options, calibration.margin);
    const double boundary = calibration.boundary_delta();
    const bool below_set = !set.empty() && boundary < set.hull.lower;
    set.margin_consistent = below_set == (calibration.p_exact < 0.5 * alpha);
    return set;
}

ConfidenceSet invert_ec(const TrialDesign& design, const Outcome& outcome, double margin,
                        double alpha, const CiOptions& options) {
    check_alpha(alpha);
    return invert_ec(calibrate_ec(design, outcome, margin, options.exact), design, outcome, alpha,
                     options);
}

ConfidenceSet confidence_set(Method method, const TrialDesign& design, const Outcome& outcome,
                             double alpha, std::optional<double> margin,
                             const CiOptions& options) {
    switch (method) {
        case Method::wald:
        case Method::mee:
        case Method::mn: return invert_asymptotic(method, design, outcome, alpha, options);
        case Method::cz_exact: return invert_cz_exact(design, outcome, alpha, options);
        case Method::ec:
            if (!margin) throw UsageError("the ec interval requires a noninferiority margin");
            return invert_ec(design, outcome, *margin, alpha, options);
    }
    throw UsageError("unknown method");
}

NoninferiorityDecision noninferiority_decision(Method method, const TrialDesign& design,
                                               const Outcome& outcome, double margin,
                                               double alpha, const CiOptions& options) {
    if (!(margin > 0.0 && margin < 1.0))
        throw DomainError("noninferiority margin must lie in (0,1), got " +
                          std::to_string(margin));
    const double boundary = -margin;
    switch (method) {
        case Method::wald:
        case Method::mee:
        case Method::mn: {
            const ConfidenceSet set = invert_asymptotic(method, design, outcome, alpha, options);
            const StatValue z = method == Method::wald ? z_wald(design, outcome, boundary)
                                : method == Method::mn ? z_mn(design, outcome, boundary)
                                                       : z_mee(design, outcome, boundary);
            return {boundary < set.hull.lower, normal_sf(z.value)};
        }
        case Method::cz_exact: {
            const ConfidenceSet set = invert_cz_exact(design, outcome, alpha, options);
            const double p = exact_pvalue(design, outcome, boundary, options.exact).value;
            return {!set.empty() && boundary < set.hull.lower, p};
        }
        case Method::ec: {
            const EcCalibration cal = calibrate_ec(design, outcome, margin, options.exact);
            const ConfidenceSet set = invert_ec(cal, design, outcome, alpha, options);
            return {!set.empty() && boundary < set.hull.lower, cal.p_exact};
        }
    }
    throw UsageError("unknown method");
}

}  // namespace riskdiff
