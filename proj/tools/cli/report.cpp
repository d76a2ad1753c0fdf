#include "report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace riskdiff::cli {

Json number(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

std::string csv_number(double x) {
    if (std::isnan(x)) return "";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string text_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void write_json(const Json& json, std::ostream& out) { out << json.dump(2) << '\n'; }

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

void write_csv_row(const std::vector<std::string>& row, std::ostream& out) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
}

std::string scalar_text(const Json& v) {
    if (v.is_null()) return "-";
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number_float()) return text_number(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

bool is_scalar(const Json& v) { return !v.is_object() && !v.is_array(); }

bool is_flat_array(const Json& v) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
        if (!is_scalar(e)) return false;
    return true;
}

bool is_flat_object(const Json& v) {
    if (!v.is_object()) return false;
    for (const auto& [k, e] : v.items())
        if (!is_scalar(e)) return false;
    return true;
}

std::string inline_text(const Json& v) {
    std::string s;
    if (v.is_array()) {
        s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + scalar_text(v[i]);
        return s + "]";
    }
    for (const auto& [k, e] : v.items()) s += (s.empty() ? "" : "  ") + k + "=" + scalar_text(e);
    return s;
}

void render(const Json& v, int indent, std::ostream& out) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    if (v.is_object()) {
        for (const auto& [k, e] : v.items()) {
            if (is_scalar(e)) {
                out << pad << k << ": " << scalar_text(e) << '\n';
            } else if (is_flat_array(e) || is_flat_object(e)) {
                out << pad << k << ": " << inline_text(e) << '\n';
            } else if (e.empty()) {
                out << pad << k << ": (none)\n";
            } else {
                out << pad << k << ":\n";
                render(e, indent + 2, out);
            }
        }
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (is_scalar(e) || is_flat_array(e) || is_flat_object(e)) {
                out << pad << "- " << (is_scalar(e) ? scalar_text(e) : inline_text(e)) << '\n';
            } else {
                out << pad << "-\n";
                render(e, indent + 2, out);
            }
        }
    } else {
        out << pad << scalar_text(v) << '\n';
    }
}

}  // namespace

void write_csv(const Report& report, std::ostream& out) {
    write_csv_row(report.csv_header, out);
    for (const auto& row : report.csv_rows) write_csv_row(row, out);
}

void write_text(const Json& json, std::ostream& out) {
    Json body = json;
    body.erase("schema");
    render(body, 0, out);
}

void write_report(const Report& report, Format format, std::ostream& out) {
    switch (format) {
        case Format::json: write_json(report.json, out); break;
        case Format::csv: write_csv(report, out); break;
        case Format::text: write_text(report.json, out); break;
    }
}

}  // namespace riskdiff::cli
