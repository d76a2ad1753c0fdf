#include "app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "report.hpp"
#include "riskdiff/ci_engine.hpp"
#include "riskdiff/coverage.hpp"
#include "riskdiff/diagnostics.hpp"
#include "riskdiff/ec_engine.hpp"
#include "riskdiff/errors.hpp"
#include "riskdiff/exact_engine.hpp"
#include "riskdiff/score_engine.hpp"

namespace riskdiff::cli {

namespace {

// Everything the subcommands can be configured with. Only the options a
// subcommand registers are ever set.
struct RunConfig {
    int n_t = 0;
    int n_c = 0;
    std::optional<int> x_t;
    std::optional<int> x_c;
    std::optional<double> margin;
    double alpha = 0.05;
    std::string method;
    std::string convention = "delta";
    int grid_points = 1001;
    double refine_tol = 1e-10;
    int scan_points = 4001;
    std::string format = "text";
    std::string output;
    unsigned threads = 1;

    std::optional<double> at;
    std::optional<double> lo;
    std::optional<double> hi;
    std::optional<double> step;
    std::vector<double> alphas{0.2, 0.1, 0.05};
    std::optional<double> p_t;
    std::optional<double> p_c;
    bool raw = false;
};

// Noninferiority convention reports delta = -(P_T - P_C); cap reports P_T - P_C.
struct Convention {
    bool ni;

    const char* name() const { return ni ? "delta" : "cap"; }
    double out(double cap_delta) const { return ni ? -cap_delta : cap_delta; }
    double in(double x) const { return ni ? -x : x; }
    Interval out(const Interval& iv) const {
        return ni ? Interval{-iv.upper, -iv.lower} : iv;
    }
};

[[noreturn]] void usage(const std::string& message) { throw UsageError(message); }

ExactOptions exact_options(const RunConfig& cfg) { return {cfg.grid_points, cfg.refine_tol}; }

CiOptions ci_options(const RunConfig& cfg) {
    CiOptions options;
    options.exact = exact_options(cfg);
    options.scan_points = cfg.scan_points;
    options.threads = cfg.threads;
    return options;
}

void validate_common(const RunConfig& cfg) {
    if (cfg.n_t < 1 || cfg.n_c < 1) usage("--nt and --nc must be at least 1");
    if (cfg.grid_points < 2) usage("--grid-points must be at least 2");
    if (!(cfg.refine_tol > 0.0)) usage("--refine-tol must be positive");
    if (cfg.scan_points < 2) usage("--scan-points must be at least 2");
}

std::optional<Outcome> optional_outcome(const RunConfig& cfg) {
    if (cfg.x_t.has_value() != cfg.x_c.has_value()) usage("--xt and --xc must be given together");
    if (!cfg.x_t) return std::nullopt;
    if (*cfg.x_t < 0 || *cfg.x_t > cfg.n_t) usage("--xt must lie in [0, nt]");
    if (*cfg.x_c < 0 || *cfg.x_c > cfg.n_c) usage("--xc must lie in [0, nc]");
    return Outcome{*cfg.x_t, *cfg.x_c};
}

Outcome required_outcome(const RunConfig& cfg) {
    auto o = optional_outcome(cfg);
    if (!o) usage("--xt and --xc are required");
    return *o;
}

// Margin of a noninferiority hypothesis: required, in (0,1).
double ni_margin(const RunConfig& cfg) {
    if (!cfg.margin) usage("--margin is required");
    if (!(*cfg.margin > 0.0 && *cfg.margin < 1.0)) usage("--margin must lie in (0,1)");
    return *cfg.margin;
}

// Boundary shift for p-values and maps: any value in (-1,1).
double any_margin(const RunConfig& cfg) {
    if (!cfg.margin) usage("--margin is required");
    if (!(*cfg.margin > -1.0 && *cfg.margin < 1.0)) usage("--margin must lie in (-1,1)");
    return *cfg.margin;
}

std::optional<double> optional_ni_margin(const RunConfig& cfg) {
    if (!cfg.margin) return std::nullopt;
    return ni_margin(cfg);
}

Method parse_method_or_usage(const std::string& name) {
    const auto m = parse_method(name);
    if (!m) usage("unknown method '" + name + "' (wald, mee, mn, cz_exact, ec)");
    return *m;
}

std::vector<double> grid_or_usage(double lo, double hi, double step) {
    if (!(step > 0.0)) usage("--step must be positive");
    if (!(hi >= lo)) usage("--hi must not be below --lo");
    return step_grid(lo, hi, step);
}

Json header(const char* command, const RunConfig& cfg, const Convention& conv) {
    Json j;
    j["schema"] = kSchema;
    j["command"] = command;
    j["convention"] = conv.name();
    j["design"] = {{"n_t", cfg.n_t}, {"n_c", cfg.n_c}};
    return j;
}

Json outcome_json(const Outcome& o) { return {{"x_t", o.x_t}, {"x_c", o.x_c}}; }

Json interval_json(const Interval& iv) {
    return {{"lower", number(iv.lower)}, {"upper", number(iv.upper)}};
}

// Confidence set expressed in the requested convention. Components and gaps
// stay in increasing order.
Json set_json(const ConfidenceSet& set, const Convention& conv) {
    Json j;
    j["method"] = std::string(method_name(set.method));
    j["alpha"] = set.alpha;
    j["margin"] = set.margin ? number(*set.margin) : Json(nullptr);
    Json components = Json::array(), gaps = Json::array();
    auto push_all = [&](const std::vector<Interval>& src, Json& dst) {
        std::vector<Interval> v;
        for (const auto& iv : src) v.push_back(conv.out(iv));
        if (conv.ni) std::reverse(v.begin(), v.end());
        for (const auto& iv : v) dst.push_back(interval_json(iv));
    };
    push_all(set.components, components);
    push_all(set.gaps, gaps);
    j["components"] = components;
    j["hull"] = set.empty() ? Json(nullptr) : interval_json(conv.out(set.hull));
    j["gaps"] = gaps;
    j["connected"] = set.connected();
    j["margin_consistent"] = set.margin_consistent ? Json(*set.margin_consistent) : Json(nullptr);
    return j;
}

std::string witness_label(const std::string& label) {
    if (label == "ni_delta" || label == "delta") return "delta";
    if (label == "delta0") return "boundary";
    return label;
}

double witness_x(const WitnessPoint& w, const Convention& conv) {
    if (w.label == "ni_delta") return conv.out(-w.x);
    if (w.label == "delta" || w.label == "delta0") return conv.out(w.x);
    return w.x;
}

Json certificate_json(const ViolationCertificate& c, const Convention& conv, bool verified) {
    Json j;
    j["kind"] = std::string(kind_name(c.kind));
    j["outcome"] = outcome_json(c.outcome);
    Json witness = Json::array();
    for (const auto& w : c.witness)
        witness.push_back(
            {{"label", witness_label(w.label)}, {"x", number(witness_x(w, conv))},
             {"value", number(w.value)}});
    j["witness"] = witness;
    j["tolerance_used"] = c.tolerance_used;
    j["margin"] = c.margin ? number(*c.margin) : Json(nullptr);
    j["alpha"] = c.alpha ? number(*c.alpha) : Json(nullptr);
    j["method"] = c.method ? Json(std::string(method_name(*c.method))) : Json(nullptr);
    j["verified"] = verified;
    return j;
}

Report certificates_report(Json j, const std::vector<ViolationCertificate>& certs,
                           const Convention& conv, const CiOptions& options) {
    Report r;
    Json list = Json::array();
    r.csv_header = {"kind", "x_t", "x_c"};
    for (int i = 1; i <= 3; ++i)
        for (const char* f : {"label", "x", "value"})
            r.csv_header.push_back("w" + std::to_string(i) + "_" + f);
    r.csv_header.insert(r.csv_header.end(), {"margin", "alpha", "method", "verified"});
    for (const auto& c : certs) {
        const bool verified = verify_certificate(c, options);
        list.push_back(certificate_json(c, conv, verified));
        std::vector<std::string> row{std::string(kind_name(c.kind)), std::to_string(c.outcome.x_t),
                                     std::to_string(c.outcome.x_c)};
        for (std::size_t i = 0; i < 3; ++i) {
            if (i < c.witness.size()) {
                row.push_back(witness_label(c.witness[i].label));
                row.push_back(csv_number(witness_x(c.witness[i], conv)));
                row.push_back(csv_number(c.witness[i].value));
            } else {
                row.insert(row.end(), {"", "", ""});
            }
        }
        row.push_back(c.margin ? csv_number(*c.margin) : "");
        row.push_back(c.alpha ? csv_number(*c.alpha) : "");
        row.push_back(c.method ? std::string(method_name(*c.method)) : "");
        row.push_back(verified ? "true" : "false");
        r.csv_rows.push_back(std::move(row));
    }
    j["certificate_count"] = certs.size();
    j["certificates"] = list;
    r.json = std::move(j);
    return r;
}

// --- commands ---------------------------------------------------------------

Report cmd_pvalue(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    const double margin = any_margin(cfg);
    const std::string name = cfg.method.empty() ? "chan" : cfg.method;
    const Method method = parse_method_or_usage(name);
    if (method == Method::ec) usage("pvalue supports chan, mee, mn and wald");
    const double boundary = -margin;

    Json j = header("pvalue", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["margin"] = margin;
    j["boundary"] = conv.out(boundary);
    const double pa = p_asy(design, o, boundary);
    Report r;
    if (method == Method::cz_exact) {
        const auto p = exact_pvalue(design, o, boundary, exact_options(cfg));
        j["method"] = "chan";
        j["p_value"] = p.value;
        j["nuisance_argmax"] = p.argmax_p_c;
        j["grid_points"] = p.grid_points;
        j["refine_tol"] = p.refine_tol;
        j["p_asy"] = pa;
        r.csv_header = {"method", "p_value", "nuisance_argmax", "grid_points", "refine_tol", "p_asy"};
        r.csv_rows.push_back({"chan", csv_number(p.value), csv_number(p.argmax_p_c),
                              std::to_string(p.grid_points), csv_number(p.refine_tol),
                              csv_number(pa)});
    } else {
        const StatValue z = method == Method::wald ? z_wald(design, o, boundary)
                            : method == Method::mn ? z_mn(design, o, boundary)
                                                   : z_mee(design, o, boundary);
        const double p = normal_sf(z.value);
        j["method"] = std::string(method_name(method));
        j["p_value"] = p;
        j["statistic"] = number(z.value);
        j["degenerate"] = z.degenerate;
        j["nuisance_argmax"] = nullptr;
        j["grid_points"] = nullptr;
        r.csv_header = {"method", "p_value", "statistic", "degenerate"};
        r.csv_rows.push_back({std::string(method_name(method)), csv_number(p),
                              csv_number(z.value), z.degenerate ? "true" : "false"});
    }
    r.json = std::move(j);
    return r;
}

Report cmd_stat(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    if (!cfg.at) usage("--at is required");
    if (!(*cfg.at > -1.0 && *cfg.at < 1.0)) usage("--at must lie in (-1,1)");
    const double delta = conv.in(*cfg.at);
    const auto margin = optional_ni_margin(cfg);

    const auto mle = restricted_mle(design, o, delta);
    const auto mee = z_mee(design, o, delta);
    const auto mn = z_mn(design, o, delta);
    const auto wald = z_wald(design, o, delta);

    Json j = header("stat", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["at"] = *cfg.at;
    j["d_hat"] = unrestricted_estimate(design, o);
    j["restricted_mle"] = {{"p_t", mle.p_t}, {"p_c", mle.p_c}, {"sigma", mle.sigma}};
    j["z_mee"] = number(mee.value);
    j["z_mn"] = number(mn.value);
    j["z_wald"] = number(wald.value);
    j["degenerate"] = {{"mee", mee.degenerate}, {"mn", mn.degenerate}, {"wald", wald.degenerate}};
    Report r;
    r.csv_header = {"at", "d_hat", "p_t", "p_c", "sigma", "z_mee", "z_mn", "z_wald"};
    r.csv_rows.push_back({csv_number(*cfg.at), csv_number(unrestricted_estimate(design, o)),
                          csv_number(mle.p_t), csv_number(mle.p_c), csv_number(mle.sigma),
                          csv_number(mee.value), csv_number(mn.value), csv_number(wald.value)});
    if (margin) {
        const auto cal = calibrate_ec(design, o, *margin, exact_options(cfg));
        const auto ec = z_ec(cal, design, o, delta);
        j["margin"] = *margin;
        j["ec"] = {{"d_hat_0", cal.d_hat_0},
                   {"p_exact", cal.p_exact},
                   {"sigma_at_boundary", cal.sigma_at_boundary},
                   {"z_ec", number(ec.value)}};
        r.csv_header.insert(r.csv_header.end(), {"margin", "d_hat_0", "p_exact", "z_ec"});
        auto& row = r.csv_rows.back();
        row.insert(row.end(), {csv_number(*margin), csv_number(cal.d_hat_0),
                               csv_number(cal.p_exact), csv_number(ec.value)});
    }
    r.json = std::move(j);
    return r;
}

struct SetResult {
    ConfidenceSet set;
    std::optional<double> p_at_margin;
};

SetResult compute_set(Method method, const TrialDesign& design, const Outcome& o,
                      const RunConfig& cfg, std::optional<double> margin) {
    const CiOptions options = ci_options(cfg);
    switch (method) {
        case Method::wald:
        case Method::mee:
        case Method::mn: {
            std::optional<double> p;
            if (margin) {
                const double b = -*margin;
                const StatValue z = method == Method::wald ? z_wald(design, o, b)
                                    : method == Method::mn ? z_mn(design, o, b)
                                                           : z_mee(design, o, b);
                p = normal_sf(z.value);
            }
            return {invert_asymptotic(method, design, o, cfg.alpha, options), p};
        }
        case Method::cz_exact: {
            std::optional<double> p;
            if (margin) p = exact_pvalue(design, o, -*margin, options.exact).value;
            return {invert_cz_exact(design, o, cfg.alpha, options), p};
        }
        case Method::ec: {
            if (!margin) usage("--margin is required for the ec interval");
            const auto cal = calibrate_ec(design, o, *margin, options.exact);
            return {invert_ec(cal, design, o, cfg.alpha, options), cal.p_exact};
        }
    }
    usage("unknown method");
}

// Adds the noninferiority reading of a set: reject H0: d <= -margin when
// -margin lies below the whole set.
void add_decision(Json& j, const SetResult& res, std::optional<double> margin,
                  const Convention& conv) {
    if (!margin) return;
    const double boundary = -*margin;
    j["boundary"] = conv.out(boundary);
    j["boundary_in_set"] = res.set.contains(boundary);
    j["reject_noninferiority_null"] = !res.set.empty() && boundary < res.set.hull.lower;
    j["p_at_margin"] = res.p_at_margin ? number(*res.p_at_margin) : Json(nullptr);
}

Report cmd_ci(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    const Method method = parse_method_or_usage(cfg.method.empty() ? "mee" : cfg.method);
    const auto margin = optional_ni_margin(cfg);
    const SetResult res = compute_set(method, design, o, cfg, margin);

    Json j = header("ci", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["set"] = set_json(res.set, conv);
    add_decision(j, res, margin, conv);

    Report r;
    r.csv_header = {"part", "index", "lower", "upper"};
    const Json& s = j["set"];
    auto rows = [&](const char* part, const Json& list) {
        for (std::size_t i = 0; i < list.size(); ++i)
            r.csv_rows.push_back({part, std::to_string(i),
                                  csv_number(list[i]["lower"].get<double>()),
                                  csv_number(list[i]["upper"].get<double>())});
    };
    rows("component", s["components"]);
    rows("gap", s["gaps"]);
    if (!res.set.empty()) {
        const Interval h = conv.out(res.set.hull);
        r.csv_rows.push_back({"hull", "0", csv_number(h.lower), csv_number(h.upper)});
    }
    r.json = std::move(j);
    return r;
}

Report cmd_compare(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    const auto margin = optional_ni_margin(cfg);
    std::vector<Method> methods{Method::wald, Method::mee, Method::mn, Method::cz_exact};
    if (margin) methods.push_back(Method::ec);

    Json j = header("compare", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["alpha"] = cfg.alpha;
    j["margin"] = margin ? number(*margin) : Json(nullptr);
    Json list = Json::array();
    Report r;
    r.csv_header = {"method", "lower", "upper", "width", "components", "boundary_in_set",
                    "reject_noninferiority_null"};
    for (Method m : methods) {
        Json entry;
        entry["method"] = std::string(method_name(m));
        SetResult res;
        try {
            res = compute_set(m, design, o, cfg, margin);
        } catch (const DegenerateCalibration& e) {
            entry["error"] = e.what();
            list.push_back(entry);
            r.csv_rows.push_back({std::string(method_name(m)), "", "", "", "", "", ""});
            continue;
        }
        entry["set"] = set_json(res.set, conv);
        add_decision(entry, res, margin, conv);
        const Interval h = res.set.empty() ? res.set.hull : conv.out(res.set.hull);
        r.csv_rows.push_back(
            {std::string(method_name(m)), csv_number(h.lower), csv_number(h.upper),
             csv_number(h.width()), std::to_string(res.set.components.size()),
             margin ? (res.set.contains(-*margin) ? "true" : "false") : "",
             margin ? (entry["reject_noninferiority_null"].get<bool>() ? "true" : "false") : ""});
        list.push_back(entry);
    }
    j["methods"] = list;
    r.json = std::move(j);
    return r;
}

Report cmd_diagnose_zec(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    const double margin = ni_margin(cfg);
    const auto user_grid =
        grid_or_usage(cfg.lo.value_or(-0.999), cfg.hi.value_or(0.999), cfg.step.value_or(1e-3));
    if (user_grid.front() <= -1.0 || user_grid.back() >= 1.0)
        usage("the delta grid must lie inside (-1,1)");
    // The scanner works in the noninferiority delta; convert and keep the grid increasing.
    std::vector<double> ni_grid;
    for (double x : user_grid) ni_grid.push_back(-conv.in(x));
    std::sort(ni_grid.begin(), ni_grid.end());

    const auto options = exact_options(cfg);
    const auto certs = scan_zec_monotonicity(design, o, margin, ni_grid, options);
    const auto cal = calibrate_ec(design, o, margin, options);
    const auto ext =
        find_zec_extremum(cal, design, o, ni_grid.front(), ni_grid.back());

    Json j = header("diagnose zec", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["margin"] = margin;
    j["d_hat_0"] = cal.d_hat_0;
    j["p_exact"] = cal.p_exact;
    j["extremum"] = {{"kind", ext.kind == ExtremumKind::minimum   ? "minimum"
                              : ext.kind == ExtremumKind::maximum ? "maximum"
                                                                  : "none"},
                     {"delta", ext.kind == ExtremumKind::none ? Json(nullptr)
                                                              : number(conv.out(-ext.ni_delta))},
                     {"value", ext.kind == ExtremumKind::none ? Json(nullptr) : number(ext.value)}};
    return certificates_report(std::move(j), certs, conv, ci_options(cfg));
}

Report cmd_diagnose_pexact(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const auto o = optional_outcome(cfg);
    const auto user_grid =
        grid_or_usage(cfg.lo.value_or(-0.5), cfg.hi.value_or(0.5), cfg.step.value_or(0.01));
    if (user_grid.front() <= -1.0 || user_grid.back() >= 1.0)
        usage("the boundary grid must lie inside (-1,1)");
    std::vector<double> boundaries;
    for (double x : user_grid) boundaries.push_back(conv.in(x));
    std::sort(boundaries.begin(), boundaries.end());

    const auto options = exact_options(cfg);
    const auto certs = o ? scan_pexact_monotonicity(design, *o, boundaries, options)
                         : scan_pexact_monotonicity_all(design, boundaries, options, cfg.threads);
    Json j = header("diagnose pexact", cfg, conv);
    j["outcome"] = o ? outcome_json(*o) : Json(nullptr);
    return certificates_report(std::move(j), certs, conv, ci_options(cfg));
}

Report cmd_diagnose_margins(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const auto o = optional_outcome(cfg);
    const auto margins =
        grid_or_usage(cfg.lo.value_or(0.01), cfg.hi.value_or(0.3), cfg.step.value_or(0.01));
    if (margins.front() <= 0.0 || margins.back() >= 1.0)
        usage("the margin grid must lie inside (0,1)");
    const auto options = exact_options(cfg);
    std::vector<ViolationCertificate> certs;
    const auto outcomes = o ? std::vector<Outcome>{*o} : enumerate_outcomes(design);
    for (const auto& x : outcomes) {
        auto c = scan_margin_coherence(design, x, cfg.alpha, margins, options);
        certs.insert(certs.end(), c.begin(), c.end());
    }
    Json j = header("diagnose margins", cfg, conv);
    j["outcome"] = o ? outcome_json(*o) : Json(nullptr);
    j["alpha"] = cfg.alpha;
    return certificates_report(std::move(j), certs, conv, ci_options(cfg));
}

Report cmd_diagnose_nesting(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Outcome o = required_outcome(cfg);
    const Method method = parse_method_or_usage(cfg.method.empty() ? "ec" : cfg.method);
    const auto margin = optional_ni_margin(cfg);
    if (method == Method::ec && !margin) usage("--margin is required for ec nesting");
    std::vector<double> alphas = cfg.alphas;
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) usage("--alphas must lie in (0,1)");
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t hi = 0; hi < alphas.size(); ++hi)
        for (std::size_t lo = 0; lo < hi; ++lo) pairs.emplace_back(alphas[hi], alphas[lo]);

    const auto options = ci_options(cfg);
    const auto certs = scan_ci_nesting(method, design, o, margin, pairs, options);
    Json j = header("diagnose nesting", cfg, conv);
    j["outcome"] = outcome_json(o);
    j["method"] = std::string(method_name(method));
    j["margin"] = margin ? number(*margin) : Json(nullptr);
    j["alphas"] = alphas;
    return certificates_report(std::move(j), certs, conv, options);
}

Report cmd_diagnose_map(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const double margin = any_margin(cfg);
    const auto map = liberal_conservative_map(design, -margin, exact_options(cfg));
    Json j = header("diagnose map", cfg, conv);
    j["margin"] = margin;
    j["boundary"] = conv.out(-margin);
    j["liberal"] = map.liberal;
    j["conservative"] = map.conservative;
    j["equal"] = map.equal;
    j["liberal_fraction"] = map.liberal_fraction();
    Json rows = Json::array();
    Report r;
    r.csv_header = {"x_t", "x_c", "p_asy", "p_exact", "relation"};
    for (const auto& row : map.rows) {
        const char* rel = row.relation < 0 ? "liberal" : row.relation > 0 ? "conservative" : "equal";
        rows.push_back({{"x_t", row.outcome.x_t},
                        {"x_c", row.outcome.x_c},
                        {"p_asy", row.p_asy},
                        {"p_exact", row.p_exact},
                        {"relation", rel}});
        r.csv_rows.push_back({std::to_string(row.outcome.x_t), std::to_string(row.outcome.x_c),
                              csv_number(row.p_asy), csv_number(row.p_exact), rel});
    }
    j["rows"] = rows;
    r.json = std::move(j);
    return r;
}

Json cell_json(const CoverageCell& c, const Convention& conv) {
    return {{"p_t", c.p_t},
            {"p_c", c.p_c},
            {"true_delta", conv.out(c.p_t - c.p_c)},
            {"coverage", c.coverage},
            {"expected_width", c.expected_width},
            {"total_mass", c.total_mass},
            {"fallback_mass", c.fallback_mass}};
}

Report cmd_coverage(const RunConfig& cfg, const Convention& conv) {
    const TrialDesign design(cfg.n_t, cfg.n_c);
    const Method method = parse_method_or_usage(cfg.method.empty() ? "cz_exact" : cfg.method);
    const auto margin = optional_ni_margin(cfg);
    if (method == Method::ec && !margin) usage("--margin is required for ec coverage");
    if (cfg.p_t.has_value() != cfg.p_c.has_value()) usage("--pt and --pc must be given together");
    for (auto p : {cfg.p_t, cfg.p_c})
        if (p && !(*p >= 0.0 && *p <= 1.0)) usage("--pt and --pc must lie in [0,1]");
    const double step = cfg.step.value_or(0.05);
    if (!(step > 0.0 && step <= 0.5)) usage("--step must lie in (0, 0.5]");

    const auto table = CiTable::build(method, design, cfg.alpha, margin, ci_options(cfg));
    Json j = header("coverage", cfg, conv);
    j["method"] = std::string(method_name(method));
    j["alpha"] = cfg.alpha;
    j["margin"] = margin ? number(*margin) : Json(nullptr);
    j["raw_components"] = cfg.raw;

    std::vector<CoverageCell> cells;
    if (cfg.p_t) {
        cells.push_back(exact_coverage(table, *cfg.p_t, *cfg.p_c, cfg.raw));
    } else {
        const auto surface = coverage_surface(table, step, cfg.raw);
        const auto& worst = surface.cells[surface.argmin];
        std::size_t below = 0;
        for (const auto& c : surface.cells) below += c.coverage < 1.0 - cfg.alpha ? 1 : 0;
        j["grid_step"] = step;
        j["summary"] = {{"cells", surface.cells.size()},
                        {"min_coverage", surface.min_coverage},
                        {"argmin", {{"p_t", worst.p_t}, {"p_c", worst.p_c}}},
                        {"mean_coverage", surface.mean_coverage},
                        {"mean_expected_width", surface.mean_expected_width},
                        {"cells_below_nominal", below}};
        cells = surface.cells;
    }
    Json list = Json::array();
    Report r;
    r.csv_header = {"p_t", "p_c", "true_delta", "coverage", "expected_width", "total_mass",
                    "fallback_mass"};
    for (const auto& c : cells) {
        list.push_back(cell_json(c, conv));
        r.csv_rows.push_back({csv_number(c.p_t), csv_number(c.p_c),
                              csv_number(conv.out(c.p_t - c.p_c)), csv_number(c.coverage),
                              csv_number(c.expected_width), csv_number(c.total_mass),
                              csv_number(c.fallback_mass)});
    }
    j["cells"] = list;
    r.json = std::move(j);
    return r;
}

// --- option registration ----------------------------------------------------

void add_design(CLI::App* sub, RunConfig& cfg, bool outcome_required) {
    sub->add_option("--nt", cfg.n_t, "treatment arm size")->required();
    sub->add_option("--nc", cfg.n_c, "control arm size")->required();
    auto* xt = sub->add_option("--xt", cfg.x_t, "treatment successes");
    auto* xc = sub->add_option("--xc", cfg.x_c, "control successes");
    if (outcome_required) {
        xt->required();
        xc->required();
    }
}

void add_output(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--convention", cfg.convention,
                    "delta: report delta = P_C - P_T (noninferiority literature); "
                    "cap: report P_T - P_C")
        ->check(CLI::IsMember({"delta", "cap"}))
        ->capture_default_str();
    sub->add_option("--format", cfg.format, "report format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    sub->add_option("--output", cfg.output, "write the report to this file instead of stdout");
}

void add_exact(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--grid-points", cfg.grid_points, "nuisance grid size for exact p-values")
        ->capture_default_str();
    sub->add_option("--refine-tol", cfg.refine_tol, "golden-section width for the nuisance search")
        ->capture_default_str();
}

void add_scan(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--scan-points", cfg.scan_points, "delta grid size for test inversion")
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)")
        ->capture_default_str();
}

void add_alpha(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--alpha", cfg.alpha, "two-sided error rate")->capture_default_str();
}

void add_grid(CLI::App* sub, RunConfig& cfg, const char* what) {
    sub->add_option("--lo", cfg.lo, std::string("lowest ") + what);
    sub->add_option("--hi", cfg.hi, std::string("highest ") + what);
    sub->add_option("--step", cfg.step, "grid step");
}

Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    return Format::text;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Exact and asymptotic inference on the risk difference in noninferiority trials",
                 "riskdiff"};
    app.require_subcommand(1);

    auto* pvalue = app.add_subcommand(
        "pvalue", "one-sided p-value for H0: P_T - P_C <= -margin (chan, mee, mn, wald)");
    add_design(pvalue, cfg, true);
    pvalue->add_option("--margin", cfg.margin, "noninferiority margin, in (-1,1)")->required();
    pvalue->add_option("--method", cfg.method, "chan (default), mee, mn or wald");
    add_exact(pvalue, cfg);
    add_output(pvalue, cfg);

    auto* stat = app.add_subcommand("stat", "test statistics at one value of the difference");
    add_design(stat, cfg, true);
    stat->add_option("--at", cfg.at, "difference at which to evaluate (in the chosen convention)")
        ->required();
    stat->add_option("--margin", cfg.margin, "margin for the exact-corrected statistic, in (0,1)");
    add_exact(stat, cfg);
    add_output(stat, cfg);

    auto* ci = app.add_subcommand("ci", "confidence set by test inversion");
    add_design(ci, cfg, true);
    ci->add_option("--method", cfg.method, "wald, mee (default), mn, cz_exact or ec");
    ci->add_option("--margin", cfg.margin, "noninferiority margin in (0,1); required for ec");
    add_alpha(ci, cfg);
    add_exact(ci, cfg);
    add_scan(ci, cfg);
    add_output(ci, cfg);

    auto* diagnose = app.add_subcommand("diagnose", "search for monotonicity and coherence failures");
    diagnose->require_subcommand(1);
    auto* zec = diagnose->add_subcommand("zec", "non-monotonicity of the exact-corrected statistic");
    add_design(zec, cfg, true);
    zec->add_option("--margin", cfg.margin, "noninferiority margin, in (0,1)")->required();
    add_grid(zec, cfg, "delta (default -0.999 .. 0.999 step 0.001)");
    add_exact(zec, cfg);
    add_output(zec, cfg);

    auto* pexact = diagnose->add_subcommand("pexact", "exact p-value decreasing in the boundary");
    add_design(pexact, cfg, false);
    add_grid(pexact, cfg, "boundary (default -0.5 .. 0.5 step 0.01)");
    add_exact(pexact, cfg);
    pexact->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    add_output(pexact, cfg);

    auto* margins = diagnose->add_subcommand("margins", "rejection at a margin but not a larger one");
    add_design(margins, cfg, false);
    add_alpha(margins, cfg);
    add_grid(margins, cfg, "margin (default 0.01 .. 0.3 step 0.01)");
    add_exact(margins, cfg);
    add_output(margins, cfg);

    auto* nesting = diagnose->add_subcommand("nesting", "confidence sets not nested in the level");
    add_design(nesting, cfg, true);
    nesting->add_option("--method", cfg.method, "wald, mee, mn, cz_exact or ec (default)");
    nesting->add_option("--margin", cfg.margin, "noninferiority margin in (0,1); required for ec");
    nesting->add_option("--alphas", cfg.alphas, "levels compared pairwise")
        ->delimiter(',')
        ->capture_default_str();
    add_exact(nesting, cfg);
    add_scan(nesting, cfg);
    add_output(nesting, cfg);

    auto* map = diagnose->add_subcommand("map", "Mee liberal/conservative relative to the exact test");
    add_design(map, cfg, false);
    map->add_option("--margin", cfg.margin, "margin, in (-1,1)")->required();
    add_exact(map, cfg);
    add_output(map, cfg);

    auto* coverage = app.add_subcommand("coverage", "exact coverage by full enumeration");
    add_design(coverage, cfg, false);
    coverage->add_option("--method", cfg.method, "wald, mee, mn, cz_exact (default) or ec");
    coverage->add_option("--margin", cfg.margin, "noninferiority margin in (0,1); required for ec");
    add_alpha(coverage, cfg);
    coverage->add_option("--step", cfg.step, "parameter grid step (default 0.05)");
    coverage->add_option("--pt", cfg.p_t, "single cell: treatment probability");
    coverage->add_option("--pc", cfg.p_c, "single cell: control probability");
    coverage->add_flag("--raw", cfg.raw, "score the raw acceptance set instead of its hull");
    add_exact(coverage, cfg);
    add_scan(coverage, cfg);
    add_output(coverage, cfg);

    auto* compare = app.add_subcommand("compare", "all intervals side by side (ec needs --margin)");
    add_design(compare, cfg, true);
    compare->add_option("--margin", cfg.margin, "noninferiority margin in (0,1)");
    add_alpha(compare, cfg);
    add_exact(compare, cfg);
    add_scan(compare, cfg);
    add_output(compare, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
        for (auto* sub : app.get_subcommands())
            for (auto* inner : sub->get_subcommands()) out << inner->help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        validate_common(cfg);
        const Convention conv{cfg.convention == "delta"};
        Report report;
        if (pvalue->parsed()) report = cmd_pvalue(cfg, conv);
        else if (stat->parsed()) report = cmd_stat(cfg, conv);
        else if (ci->parsed()) report = cmd_ci(cfg, conv);
        else if (zec->parsed()) report = cmd_diagnose_zec(cfg, conv);
        else if (pexact->parsed()) report = cmd_diagnose_pexact(cfg, conv);
        else if (margins->parsed()) report = cmd_diagnose_margins(cfg, conv);
        else if (nesting->parsed()) report = cmd_diagnose_nesting(cfg, conv);
        else if (map->parsed()) report = cmd_diagnose_map(cfg, conv);
        else if (coverage->parsed()) report = cmd_coverage(cfg, conv);
        else report = cmd_compare(cfg, conv);

        const Format format = parse_format(cfg.format);
        if (cfg.output.empty()) {
            write_report(report, format, out);
        } else {
            std::ofstream file(cfg.output, std::ios::binary);
            if (!file) usage("cannot open output file '" + cfg.output + "'");
            write_report(report, format, file);
        }
        return kExitOk;
    } catch (const DegenerateCalibration& e) {
        err << "error: degenerate calibration: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

}  // namespace riskdiff::cli
