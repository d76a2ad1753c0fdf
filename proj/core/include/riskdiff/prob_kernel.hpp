#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskdiff {

// Two independent binomial arms: treatment (T) and control (C).
//
// Throughout the library a `delta` argument is a value of the risk difference
// P_T - P_C. Noninferiority literature often uses the opposite sign; that
// conversion happens at the CLI boundary only.
struct TrialDesign {
    int n_t;
    int n_c;

    TrialDesign(int n_t, int n_c);

    int total() const { return n_t + n_c; }
    std::size_t outcome_count() const {
        return static_cast<std::size_t>(n_t + 1) * static_cast<std::size_t>(n_c + 1);
    }

    friend bool operator==(const TrialDesign&, const TrialDesign&) = default;
};

struct Outcome {
    int x_t;
    int x_c;

    friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

// Throws DomainError unless 0 <= x_t <= n_t and 0 <= x_c <= n_c.
void check_outcome(const TrialDesign& design, const Outcome& outcome);

// Position of `outcome` in enumerate_outcomes(design).
inline std::size_t outcome_index(const TrialDesign& design, const Outcome& outcome) {
    return static_cast<std::size_t>(outcome.x_t) * static_cast<std::size_t>(design.n_c + 1) +
           static_cast<std::size_t>(outcome.x_c);
}

// Product-binomial model parameterised by the nuisance P_C and the risk
// difference, so that P_T = p_c + delta.
struct JointModel {
    double p_c;
    double delta;

    double p_t() const { return p_c + delta; }
};

// Throws DomainError when p_c or p_c + delta leaves [0, 1].
JointModel make_joint_model(double p_c, double delta);

// All (n_t + 1)(n_c + 1) outcomes, x_t outer and x_c inner.
std::vector<Outcome> enumerate_outcomes(const TrialDesign& design);

// ln(n!) for n in [0, max_n], built once.
class LogFactorialTable {
public:
    explicit LogFactorialTable(int max_n);

    int max_n() const { return static_cast<int>(table_.size()) - 1; }
    double operator()(int n) const { return table_[static_cast<std::size_t>(n)]; }
    double log_choose(int n, int k) const { return table_[n] - table_[k] - table_[n - k]; }

private:
    std::vector<double> table_;
};

// ln C(n, k). Uses a shared table for n up to 4096 and lgamma beyond.
double log_choose(int n, int k);

// ln[C(n,k) p^k (1-p)^(n-k)]; -infinity where the pmf is exactly zero.
double log_binom_pmf(int k, int n, double p);

// Fills out[k] = log_binom_pmf(k, n, p) for k = 0..n. out.size() must be n+1.
void log_binom_pmf_row(int n, double p, std::span<double> out);

double joint_outcome_prob(const TrialDesign& design, const Outcome& outcome,
                          const JointModel& model);

double normal_cdf(double z);
// 1 - normal_cdf(z) without cancellation.
double normal_sf(double z);

// Standard normal quantile, q in (0, 1).
double inverse_normal_cdf(double q);

// Phi^{-1}(1 - p), computed without forming 1 - p.
double normal_upper_quantile(double p);

}  // namespace riskdiff
