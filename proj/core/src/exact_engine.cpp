#include "riskdiff/exact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "riskdiff/errors.hpp"

namespace riskdiff {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

void check_options(const ExactOptions& options) {
    if (options.grid_points < 2)
        throw DomainError("grid_points must be at least 2, got " +
                          std::to_string(options.grid_points));
    if (!(options.refine_tol > 0.0)) throw DomainError("refine_tol must be positive");
}

// Evaluates prefix sums of joint probabilities over outcomes listed in a
// fixed order, at a given P_C on the boundary P_T = P_C + delta.
class PrefixSummer {
public:
    PrefixSummer(const TrialDesign& design, double delta, std::span<const std::size_t> order)
        : design_(design),
          delta_(delta),
          log_row_t_(design.n_t + 1),
          log_row_c_(design.n_c + 1),
          row_t_(design.n_t + 1),
          row_c_(design.n_c + 1) {
        x_t_.reserve(order.size());
        x_c_.reserve(order.size());
        const auto stride = static_cast<std::size_t>(design.n_c + 1);
        for (std::size_t idx : order) {
            x_t_.push_back(static_cast<int>(idx / stride));
            x_c_.push_back(static_cast<int>(idx % stride));
        }
    }

    void load(double p_c) {
        const double p_t = std::clamp(p_c + delta_, 0.0, 1.0);
        log_binom_pmf_row(design_.n_t, p_t, log_row_t_);
        log_binom_pmf_row(design_.n_c, std::clamp(p_c, 0.0, 1.0), log_row_c_);
        for (std::size_t k = 0; k < row_t_.size(); ++k) row_t_[k] = std::exp(log_row_t_[k]);
        for (std::size_t k = 0; k < row_c_.size(); ++k) row_c_[k] = std::exp(log_row_c_[k]);
    }

    double term(std::size_t j) const { return row_t_[x_t_[j]] * row_c_[x_c_[j]]; }

    double prefix(double p_c, std::size_t length) {
        load(p_c);
        double sum = 0.0;
        for (std::size_t j = 0; j < length; ++j) sum += term(j);
        return sum;
    }

private:
    TrialDesign design_;
    double delta_;
    std::vector<int> x_t_;
    std::vector<int> x_c_;
    std::vector<double> log_row_t_;
    std::vector<double> log_row_c_;
    std::vector<double> row_t_;
    std::vector<double> row_c_;
};

struct Best {
    double value;
    double p_c;
};

// Golden-section maximisation of f on [a, b] down to width tol, seeded with
// a known point.
template <class F>
Best golden_refine(F&& f, double a, double b, double tol, Best best) {
    double c = b - kInvGolden * (b - a);
    double d = a + kInvGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    auto consider = [&best](double p, double v) {
        if (v > best.value) best = {v, p};
    };
    consider(c, fc);
    consider(d, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvGolden * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvGolden * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    return best;
}

}  // namespace

NuisanceDomain nuisance_domain(double delta) {
    if (!(delta > -1.0 && delta < 1.0))
        throw DomainError("boundary delta must lie in (-1,1), got " + std::to_string(delta));
    return {std::max(0.0, -delta), std::min(1.0, 1.0 - delta)};
}

BoundaryOrdering::BoundaryOrdering(const TrialDesign& design, double delta)
    : design_(design), delta_(delta) {
    nuisance_domain(delta);
    const auto outcomes = enumerate_outcomes(design);
    keys_.reserve(outcomes.size());
    for (const auto& o : outcomes) keys_.push_back(order_key(design, o, delta));

    auto build = [this](TailSide side, std::vector<std::size_t>& sorted,
                        std::vector<std::size_t>& lengths) {
        sorted.resize(keys_.size());
        std::iota(sorted.begin(), sorted.end(), std::size_t{0});
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return more_extreme(keys_[a], keys_[b], side);
        });
        lengths.resize(keys_.size());
        for (std::size_t i = 0; i < keys_.size(); ++i) {
            const auto end = std::partition_point(
                sorted.begin(), sorted.end(),
                [&](std::size_t y) { return in_tail(keys_[y], keys_[i], side); });
            lengths[i] = static_cast<std::size_t>(end - sorted.begin());
        }
    };
    build(TailSide::large_z, sorted_large_, length_large_);
    build(TailSide::small_z, sorted_small_, length_small_);
}

std::span<const std::size_t> BoundaryOrdering::sorted(TailSide side) const {
    return side == TailSide::large_z ? sorted_large_ : sorted_small_;
}

std::size_t BoundaryOrdering::tail_length(std::size_t outcome_idx, TailSide side) const {
    return side == TailSide::large_z ? length_large_[outcome_idx] : length_small_[outcome_idx];
}

ExactPValue BoundaryOrdering::pvalue(std::size_t outcome_idx, TailSide side,
                                     const ExactOptions& options) const {
    const std::size_t length = tail_length(outcome_idx, side);
    return evaluate(side, std::span<const std::size_t>(&length, 1), options).front();
}

std::vector<ExactPValue> BoundaryOrdering::pvalues_all(TailSide side,
                                                       const ExactOptions& options) const {
    const auto& all_lengths = side == TailSide::large_z ? length_large_ : length_small_;
    std::vector<std::size_t> unique_lengths(all_lengths);
    std::sort(unique_lengths.begin(), unique_lengths.end());
    unique_lengths.erase(std::unique(unique_lengths.begin(), unique_lengths.end()),
                         unique_lengths.end());
    const auto per_length = evaluate(side, unique_lengths, options);

    std::vector<ExactPValue> out;
    out.reserve(all_lengths.size());
    for (std::size_t len : all_lengths) {
        const auto pos = std::lower_bound(unique_lengths.begin(), unique_lengths.end(), len);
        out.push_back(per_length[static_cast<std::size_t>(pos - unique_lengths.begin())]);
    }
    return out;
}

// `lengths` must be sorted ascending.
std::vector<ExactPValue> BoundaryOrdering::evaluate(TailSide side,
                                                    std::span<const std::size_t> lengths,
                                                    const ExactOptions& options) const {
    check_options(options);
    const NuisanceDomain dom = nuisance_domain(delta_);
    const auto grid_n = static_cast<std::size_t>(options.grid_points);
    const std::size_t max_len = lengths.empty() ? 0 : lengths.back();

    PrefixSummer summer(design_, delta_, sorted(side));
    auto grid_point = [&](std::size_t i) {
        if (i + 1 == grid_n) return dom.hi;
        return dom.lo + (dom.hi - dom.lo) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    };

    // values[i * lengths.size() + k] = tail probability of lengths[k] at grid point i
    std::vector<double> values(grid_n * lengths.size());
    for (std::size_t i = 0; i < grid_n; ++i) {
        summer.load(grid_point(i));
        double sum = 0.0;
        std::size_t k = 0;
        for (std::size_t j = 0; j < max_len && k < lengths.size(); ++j) {
            sum += summer.term(j);
            while (k < lengths.size() && lengths[k] == j + 1) values[i * lengths.size() + k++] = sum;
        }
        while (k < lengths.size()) values[i * lengths.size() + k++] = 0.0;
    }

    std::vector<ExactPValue> out;
    out.reserve(lengths.size());
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        auto v = [&](std::size_t i) { return values[i * lengths.size() + k]; };
        auto f = [&](double p) { return summer.prefix(p, lengths[k]); };

        // Differences below the summation rounding level are not treated as
        // rises, so flat stretches of a nearly full tail do not spawn
        // spurious local maxima.
        double peak = 0.0;
        for (std::size_t i = 0; i < grid_n; ++i) peak = std::max(peak, v(i));
        const double noise = 4.0 * static_cast<double>(lengths[k]) *
                             std::numeric_limits<double>::epsilon() * peak;

        Best best{-1.0, dom.lo};
        for (std::size_t i = 0; i < grid_n; ++i) {
            const bool rises = i == 0 || v(i) > v(i - 1) + noise;
            const bool holds = i + 1 == grid_n || v(i) >= v(i + 1) - noise;
            if (!(rises && holds)) continue;
            const Best local{v(i), grid_point(i)};
            const Best refined = golden_refine(f, grid_point(i == 0 ? 0 : i - 1),
                                               grid_point(std::min(i + 1, grid_n - 1)),
                                               options.refine_tol, local);
            if (refined.value > best.value) best = refined;
        }
        out.push_back({std::clamp(best.value, 0.0, 1.0), best.p_c, options.grid_points,
                       options.refine_tol, delta_});
    }
    return out;
}

TailSet tail_set(const TrialDesign& design, const Outcome& observed, double delta0,
                 TailSide side) {
    check_outcome(design, observed);
    const BoundaryOrdering ordering(design, delta0);
    const std::size_t obs_idx = outcome_index(design, observed);
    const auto sorted = ordering.sorted(side);
    std::vector<std::size_t> members(sorted.begin(),
                                     sorted.begin() + static_cast<std::ptrdiff_t>(
                                                          ordering.tail_length(obs_idx, side)));
    std::sort(members.begin(), members.end());

    TailSet tail{{}, z_mee(design, observed, delta0)};
    const auto stride = static_cast<std::size_t>(design.n_c + 1);
    for (std::size_t idx : members)
        tail.outcomes.push_back({static_cast<int>(idx / stride), static_cast<int>(idx % stride)});
    return tail;
}

double tail_prob(const TrialDesign& design, const TailSet& tail, const JointModel& model) {
    const JointModel m = make_joint_model(model.p_c, model.delta);
    std::vector<double> logs;
    logs.reserve(tail.outcomes.size());
    for (const auto& o : tail.outcomes) {
        check_outcome(design, o);
        logs.push_back(log_binom_pmf(o.x_t, design.n_t, m.p_t()) +
                       log_binom_pmf(o.x_c, design.n_c, m.p_c));
    }
    if (logs.empty()) return 0.0;
    const double peak = *std::max_element(logs.begin(), logs.end());
    if (peak == -std::numeric_limits<double>::infinity()) return 0.0;
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - peak);
    return std::exp(peak) * acc;
}

ExactPValue exact_pvalue(const TrialDesign& design, const Outcome& observed, double delta0,
                         const ExactOptions& options, TailSide side) {
    check_outcome(design, observed);
    check_options(options);
    const BoundaryOrdering ordering(design, delta0);
    return ordering.pvalue(outcome_index(design, observed), side, options);
}

std::vector<ExactPValue> exact_pvalues_all(const TrialDesign& design, double delta0,
                                           const ExactOptions& options, TailSide side) {
    check_options(options);
    const BoundaryOrdering ordering(design, delta0);
    return ordering.pvalues_all(side, options);
}

}  // namespace riskdiff
