#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace riskdiff::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "riskdiff/1";

enum class Format { json, csv, text };

// Finite values as JSON numbers, +/-inf as the strings "inf" / "-inf", NaN as
// null, so every report survives a parse / dump round trip unchanged.
Json number(double x);

// A command's result: the JSON document is authoritative; the CSV table is a
// flat view of its main rows; text mode renders the JSON for reading.
struct Report {
    Json json;
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
};

// Full-precision CSV field for a number (shortest round-trip form).
std::string csv_number(double x);

// Six significant digits, "inf" / "-inf" / "nan" spelled out.
std::string text_number(double x);

void write_json(const Json& json, std::ostream& out);
void write_csv(const Report& report, std::ostream& out);
void write_text(const Json& json, std::ostream& out);
void write_report(const Report& report, Format format, std::ostream& out);

}  // namespace riskdiff::cli
