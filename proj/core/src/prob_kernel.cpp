#include "riskdiff/prob_kernel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "riskdiff/errors.hpp"

namespace riskdiff {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kSharedTableMax = 4096;

const LogFactorialTable& shared_table() {
    static const LogFactorialTable table(kSharedTableMax);
    return table;
}

}  // namespace

TrialDesign::TrialDesign(int n_t_, int n_c_) : n_t(n_t_), n_c(n_c_) {
    if (n_t < 1 || n_c < 1)
        throw DomainError("arm sizes must be positive, got n_t=" + std::to_string(n_t) +
                          " n_c=" + std::to_string(n_c));
}

void check_outcome(const TrialDesign& design, const Outcome& outcome) {
    if (outcome.x_t < 0 || outcome.x_t > design.n_t || outcome.x_c < 0 ||
        outcome.x_c > design.n_c)
        throw DomainError("outcome (" + std::to_string(outcome.x_t) + "," +
                          std::to_string(outcome.x_c) + ") outside design (" +
                          std::to_string(design.n_t) + "," + std::to_string(design.n_c) + ")");
}

JointModel make_joint_model(double p_c, double delta) {
    const JointModel model{p_c, delta};
    const double p_t = model.p_t();
    if (!(p_c >= 0.0 && p_c <= 1.0) || !(p_t >= 0.0 && p_t <= 1.0))
        throw DomainError("infeasible joint model: p_c=" + std::to_string(p_c) +
                          " delta=" + std::to_string(delta));
    return model;
}

std::vector<Outcome> enumerate_outcomes(const TrialDesign& design) {
    std::vector<Outcome> out;
    out.reserve(design.outcome_count());
    for (int x_t = 0; x_t <= design.n_t; ++x_t)
        for (int x_c = 0; x_c <= design.n_c; ++x_c) out.push_back({x_t, x_c});
    return out;
}

LogFactorialTable::LogFactorialTable(int max_n) {
    if (max_n < 0) throw DomainError("log-factorial table size must be nonnegative");
    table_.resize(static_cast<std::size_t>(max_n) + 1);
    for (int n = 0; n <= max_n; ++n) table_[n] = std::lgamma(static_cast<double>(n) + 1.0);
}

double log_choose(int n, int k) {
    if (n <= kSharedTableMax) return shared_table().log_choose(n, k);
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void log_binom_pmf_row(int n, double p, std::span<double> out) {
    if (n < 0 || out.size() != static_cast<std::size_t>(n) + 1)
        throw DomainError("log_binom_pmf_row: output size must be n+1");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]");

    if (p == 0.0 || p == 1.0) {
        const int mass_at = p == 0.0 ? 0 : n;
        for (int k = 0; k <= n; ++k) out[k] = k == mass_at ? 0.0 : kNegInf;
        return;
    }
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    for (int k = 0; k <= n; ++k) out[k] = log_choose(n, k) + k * log_p + (n - k) * log_q;
}

double log_binom_pmf(int k, int n, double p) {
    if (n < 0 || k < 0 || k > n)
        throw DomainError("log_binom_pmf: k=" + std::to_string(k) + " outside [0," +
                          std::to_string(n) + "]");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]");
    if (p == 0.0) return k == 0 ? 0.0 : kNegInf;
    if (p == 1.0) return k == n ? 0.0 : kNegInf;
    return log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

double joint_outcome_prob(const TrialDesign& design, const Outcome& outcome,
                          const JointModel& model) {
    check_outcome(design, outcome);
    const JointModel m = make_joint_model(model.p_c, model.delta);
    return std::exp(log_binom_pmf(outcome.x_t, design.n_t, m.p_t()) +
                    log_binom_pmf(outcome.x_c, design.n_c, m.p_c));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation (relative error ~1.15e-9) followed by one
// Halley step against erfc. Valid for q in (0, 0.5], result <= 0.
double lower_quantile(double q) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double kTailSplit = 0.02425;

    double x;
    if (q < kTailSplit) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else {
        const double r = q - 0.5;
        const double s = r * r;
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    }

    const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (density > 0.0 && std::isfinite(density)) {
        const double u = (normal_cdf(x) - q) / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

void check_open_unit(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw DomainError("normal quantile requires a probability in (0,1), got " +
                          std::to_string(q));
}

}  // namespace

double inverse_normal_cdf(double q) {
    check_open_unit(q);
    return q <= 0.5 ? lower_quantile(q) : -lower_quantile(1.0 - q);
}

double normal_upper_quantile(double p) {
    check_open_unit(p);
    return p <= 0.5 ? -lower_quantile(p) : lower_quantile(1.0 - p);
}

}  // namespace riskdiff
