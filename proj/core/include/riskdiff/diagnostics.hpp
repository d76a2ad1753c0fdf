#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "riskdiff/ci_engine.hpp"
#include "riskdiff/ec_engine.hpp"
#include "riskdiff/exact_engine.hpp"

namespace riskdiff {

enum class ViolationKind { zec_nonmonotone, pexact_nonmonotone, margin_incoherence, nesting_failure };

std::string_view kind_name(ViolationKind kind);

// One coordinate of a witness and the quantity computed there. `label` names
// the coordinate: "ni_delta", "delta0", "margin", "delta" or "alpha".
struct WitnessPoint {
    std::string label;
    double x;
    double value;
};

// A concrete, recomputable instance of a pathology. The `context` fields hold
// whatever the kind needs to recompute the witness (margin for EC, alpha for
// margin coherence, method for nesting).
struct ViolationCertificate {
    ViolationKind kind;
    TrialDesign design;
    Outcome outcome;
    std::vector<WitnessPoint> witness;
    double tolerance_used;
    std::optional<double> margin;
    std::optional<double> alpha;
    std::optional<Method> method;
};

inline constexpr double kDiagnosticTolerance = 1e-9;

// lo, lo + step, ... up to hi (inclusive within half a step).
std::vector<double> step_grid(double lo, double hi, double step);

// Adjacent triples of the noninferiority-convention grid where z_ec has a strict
// interior minimum or maximum beyond the tolerance.
std::vector<ViolationCertificate> scan_zec_monotonicity(const TrialDesign& design,
                                                        const Outcome& outcome, double margin,
                                                        std::span<const double> ni_delta_grid,
                                                        const ExactOptions& options = {});

// Adjacent pairs of the boundary grid where the exact p-value decreases as
// the null boundary delta0 increases.
std::vector<ViolationCertificate> scan_pexact_monotonicity(const TrialDesign& design,
                                                           const Outcome& outcome,
                                                           std::span<const double> delta0_grid,
                                                           const ExactOptions& options = {});

// scan_pexact_monotonicity for every outcome of the design, in lexicographic
// outcome order.
std::vector<ViolationCertificate> scan_pexact_monotonicity_all(const TrialDesign& design,
                                                               std::span<const double> delta0_grid,
                                                               const ExactOptions& options = {},
                                                               unsigned threads = 1);

// Pairs of margins m < m_bar where the exact test rejects at m but not at
// the larger m_bar. Throws DomainError unless 0 < alpha < 1.
std::vector<ViolationCertificate> scan_margin_coherence(const TrialDesign& design,
                                                        const Outcome& outcome, double alpha,
                                                        std::span<const double> margin_grid,
                                                        const ExactOptions& options = {});

// Points inside the (1 - alpha_hi) set but outside the (1 - alpha_lo) set,
// for each pair (alpha_hi, alpha_lo) with alpha_hi > alpha_lo. cz_exact sets
// are compared through their gap-filled hulls, other methods through their
// raw components.
std::vector<ViolationCertificate> scan_ci_nesting(
    Method method, const TrialDesign& design, const Outcome& outcome,
    std::optional<double> margin, std::span<const std::pair<double, double>> alpha_pairs,
    const CiOptions& options = {});

// Recomputes the witness quantities from scratch and checks that the
// claimed inequality holds with at least `tolerance_used` to spare.
bool verify_certificate(const ViolationCertificate& certificate, const CiOptions& options = {});

// -1: Mee liberal (p_asy < p_exact), +1: conservative, 0: equal to 1e-12.
struct LiberalRow {
    Outcome outcome;
    double p_asy;
    double p_exact;
    int relation;
};

struct LiberalMap {
    TrialDesign design;
    double delta0;
    std::vector<LiberalRow> rows;
    std::size_t liberal = 0;
    std::size_t conservative = 0;
    std::size_t equal = 0;

    double liberal_fraction() const {
        return rows.empty() ? 0.0 : static_cast<double>(liberal) / rows.size();
    }
};

LiberalMap liberal_conservative_map(const TrialDesign& design, double delta0,
                                    const ExactOptions& options = {});

}  // namespace riskdiff
