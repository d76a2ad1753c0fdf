#include "riskdiff/coverage.hpp"

#include <cmath>
#include <string>

#include "riskdiff/errors.hpp"
#include "riskdiff/parallel.hpp"

namespace riskdiff {

namespace {

std::vector<double> pmf_row(int n, double p) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1);
    log_binom_pmf_row(n, p, row);
    for (double& v : row) v = std::exp(v);
    return row;
}

}  // namespace

CiTable CiTable::build(Method method, const TrialDesign& design, double alpha,
                       std::optional<double> margin, const CiOptions& options) {
    if (method == Method::ec && !margin)
        throw UsageError("ec coverage requires a noninferiority margin");
    CiTable table(method, design, alpha, method == Method::ec ? margin : std::nullopt);
    const auto outcomes = enumerate_outcomes(design);
    table.fallback_.assign(outcomes.size(), false);

    if (method == Method::cz_exact) {
        table.sets_ = invert_cz_exact_all(design, alpha, options);
        return table;
    }

    table.sets_.resize(outcomes.size());
    CiOptions serial = options;
    serial.threads = 1;
    std::vector<char> fallback(outcomes.size(), 0);
    parallel_for(outcomes.size(), options.threads, [&](std::size_t o) {
        if (method != Method::ec) {
            table.sets_[o] = invert_asymptotic(method, design, outcomes[o], alpha, serial);
            return;
        }
        try {
            table.sets_[o] = invert_ec(design, outcomes[o], *margin, alpha, serial);
        } catch (const DegenerateCalibration&) {
            table.sets_[o] = invert_asymptotic(Method::mee, design, outcomes[o], alpha, serial);
            fallback[o] = 1;
        }
    });
    for (std::size_t o = 0; o < outcomes.size(); ++o) table.fallback_[o] = fallback[o] != 0;
    return table;
}

CoverageCell exact_coverage(const CiTable& table, double p_t, double p_c,
                            bool use_raw_components) {
    if (!(p_t >= 0.0 && p_t <= 1.0 && p_c >= 0.0 && p_c <= 1.0))
        throw DomainError("coverage probabilities must lie in [0,1]");
    const TrialDesign& design = table.design();
    const auto row_t = pmf_row(design.n_t, p_t);
    const auto row_c = pmf_row(design.n_c, p_c);
    const double truth = p_t - p_c;

    CoverageCell cell{p_t, p_c, 0.0, 0.0, table.method(), table.alpha(), table.margin(), 0.0, 0.0};
    for (int x_t = 0; x_t <= design.n_t; ++x_t) {
        for (int x_c = 0; x_c <= design.n_c; ++x_c) {
            const double w = row_t[x_t] * row_c[x_c];
            cell.total_mass += w;
            const std::size_t idx = outcome_index(design, {x_t, x_c});
            if (table.fallback()[idx]) cell.fallback_mass += w;
            const ConfidenceSet& set = table.sets()[idx];
            if (set.empty()) continue;
            double width = set.hull.width();
            bool covered = set.hull.contains(truth);
            if (use_raw_components) {
                width = 0.0;
                for (const auto& c : set.components) width += c.width();
                covered = set.contains(truth);
            }
            if (covered) cell.coverage += w;
            cell.expected_width += w * width;
        }
    }
    return cell;
}

CoverageCell exact_coverage(Method method, const TrialDesign& design, double p_t, double p_c,
                            double alpha, std::optional<double> margin,
                            const CoverageOptions& options) {
    const CiTable table = CiTable::build(method, design, alpha, margin, options.ci);
    return exact_coverage(table, p_t, p_c, options.use_raw_components);
}

CoverageSurface coverage_surface(const CiTable& table, double p_grid_step,
                                 bool use_raw_components) {
    if (!(p_grid_step > 0.0 && p_grid_step <= 0.5))
        throw DomainError("p_grid_step must lie in (0, 0.5], got " + std::to_string(p_grid_step));
    const auto steps = static_cast<int>(std::floor(1.0 / p_grid_step + 1e-9));
    std::vector<double> ps;
    for (int i = 0; i <= steps; ++i) ps.push_back(std::min(1.0, i * p_grid_step));
    if (ps.back() < 1.0 - 1e-12) ps.push_back(1.0);

    CoverageSurface surface{{}, 0.0, 0, 0.0, 0.0};
    surface.cells.reserve(ps.size() * ps.size());
    for (double p_t : ps)
        for (double p_c : ps) surface.cells.push_back(exact_coverage(table, p_t, p_c, use_raw_components));

    surface.min_coverage = surface.cells.front().coverage;
    for (std::size_t i = 0; i < surface.cells.size(); ++i) {
        const auto& c = surface.cells[i];
        if (c.coverage < surface.min_coverage) {
            surface.min_coverage = c.coverage;
            surface.argmin = i;
        }
        surface.mean_coverage += c.coverage;
        surface.mean_expected_width += c.expected_width;
    }
    surface.mean_coverage /= static_cast<double>(surface.cells.size());
    surface.mean_expected_width /= static_cast<double>(surface.cells.size());
    return surface;
}

CoverageSurface coverage_surface(Method method, const TrialDesign& design, double p_grid_step,
                                 double alpha, std::optional<double> margin,
                                 const CoverageOptions& options) {
    const CiTable table = CiTable::build(method, design, alpha, margin, options.ci);
    return coverage_surface(table, p_grid_step, options.use_raw_components);
}

}  // namespace riskdiff
