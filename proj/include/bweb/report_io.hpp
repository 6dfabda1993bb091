#pragma once

// EstimateReport rows as CSV and JSON. Numbers use %.17g so files round-trip
// exactly; empty cells mean "absent" (no target, no abscissa).

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bweb/stats.hpp"

namespace bweb {

const std::vector<std::string>& report_csv_columns();

std::string reports_to_csv(std::span<const EstimateReport> rows);
// Throws ConfigError when the header or the schema column does not match.
std::vector<EstimateReport> reports_from_csv(const std::string& text);

nlohmann::json report_to_json(const EstimateReport& r);

// %.17g, with "inf" / "-inf" / "nan" spelled out.
std::string format_number(double v);

// Splits one CSV line; fields may be double-quoted.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace bweb
