#include "bweb/report_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bweb/error.hpp"

namespace bweb {

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {
      "schema",    "name",       "series",  "x",        "estimate", "std_error",    "target",
      "tolerance", "comparison", "verdict", "replicas", "seed",     "config_digest"};
  return cols;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad number '" + s + "'");
  }
}

Comparison comparison_from(const std::string& s) {
  if (s == "two_sided") return Comparison::two_sided;
  if (s == "at_most") return Comparison::at_most;
  if (s == "at_least") return Comparison::at_least;
  if (s == "none") return Comparison::none;
  throw ConfigError("unknown comparison '" + s + "'");
}

Verdict verdict_from(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "fail") return Verdict::fail;
  if (s == "informational") return Verdict::informational;
  if (s == "not_applicable") return Verdict::not_applicable;
  throw ConfigError("unknown verdict '" + s + "'");
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::string reports_to_csv(std::span<const EstimateReport> rows) {
  std::ostringstream os;
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const EstimateReport& r : rows) {
    os << kReportSchema << ',' << quoted(r.name) << ',' << quoted(r.series) << ','
       << (std::isnan(r.x) ? "" : format_number(r.x)) << ',' << format_number(r.estimate)
       << ',' << format_number(r.std_error) << ','
       << (r.target ? format_number(*r.target) : "") << ',' << format_number(r.tolerance)
       << ',' << to_string(r.comparison) << ',' << to_string(r.verdict) << ',' << r.replicas
       << ',' << r.seed << ',' << r.config_digest << '\n';
  }
  return os.str();
}

std::vector<EstimateReport> reports_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != report_csv_columns()) {
    throw ConfigError("not a report CSV (header mismatch)");
  }
  std::vector<EstimateReport> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != report_csv_columns().size()) throw ConfigError("report row has wrong arity");
    if (f[0] != kReportSchema) throw ConfigError("unsupported report schema '" + f[0] + "'");
    EstimateReport r;
    r.name = f[1];
    r.series = f[2];
    if (!f[3].empty()) r.x = parse_number(f[3]);
    r.estimate = parse_number(f[4]);
    r.std_error = parse_number(f[5]);
    if (!f[6].empty()) r.target = parse_number(f[6]);
    r.tolerance = parse_number(f[7]);
    r.comparison = comparison_from(f[8]);
    r.verdict = verdict_from(f[9]);
    try {
      r.replicas = std::stoull(f[10]);
      r.seed = std::stoull(f[11]);
    } catch (const std::logic_error&) {
      throw ConfigError("bad replicas or seed field");
    }
    r.config_digest = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json report_to_json(const EstimateReport& r) {
  nlohmann::json j = {{"schema", kReportSchema},
                      {"name", r.name},
                      {"series", r.series},
                      {"estimate", r.estimate},
                      {"std_error", r.std_error},
                      {"tolerance", r.tolerance},
                      {"comparison", to_string(r.comparison)},
                      {"verdict", to_string(r.verdict)},
                      {"replicas", r.replicas},
                      {"seed", r.seed},
                      {"config_digest", r.config_digest}};
  j["x"] = std::isnan(r.x) ? nlohmann::json(nullptr) : nlohmann::json(r.x);
  j["target"] = r.target ? nlohmann::json(*r.target) : nlohmann::json(nullptr);
  return j;
}

}  // namespace bweb
