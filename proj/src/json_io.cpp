#include "bweb/json_io.hpp"

#include <cmath>
#include <fstream>

#include "bweb/error.hpp"

namespace bweb {

using nlohmann::json;

json encode_extended(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  return v;
}

double decode_extended(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+inf" || s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError("expected a number, \"+inf\" or \"-inf\", got " + j.dump());
}

namespace {

std::string sentinel_name(Sentinel s) {
  switch (s) {
    case Sentinel::plus_infinity:
      return "+inf";
    case Sentinel::minus_infinity:
      return "-inf";
    case Sentinel::none:
      break;
  }
  return "none";
}

Sentinel sentinel_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "none") return Sentinel::none;
  if (s == "+inf") return Sentinel::plus_infinity;
  if (s == "-inf") return Sentinel::minus_infinity;
  throw ConfigError("unknown sentinel \"" + s + "\"");
}

}  // namespace

json path_to_json(const Path& p) {
  json knots = json::array();
  for (const Knot& k : p.knots()) knots.push_back({k.t, k.x});
  return {{"start", encode_extended(p.start_time())},
          {"knots", std::move(knots)},
          {"sentinel", sentinel_name(p.sentinel_kind())}};
}

Path path_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("path must be a JSON object");
    const Sentinel kind = j.contains("sentinel") ? sentinel_from(j.at("sentinel"))
                                                 : Sentinel::none;
    const double start = decode_extended(j.at("start"));
    if (kind != Sentinel::none) return Path::sentinel(kind, start);
    std::vector<Knot> knots;
    for (const json& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2) throw ConfigError("knot must be [t, x]");
      knots.push_back({decode_extended(k[0]), decode_extended(k[1])});
    }
    if (start == -kInf) return Path::from_minus_infinity(std::move(knots));
    Path p = Path::polygonal(std::move(knots));
    if (p.start_time() != start) {
      throw ConfigError("path start must equal its first knot time");
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed path: ") + e.what());
  }
}

json paths_to_json(std::span<const Path> paths) {
  json arr = json::array();
  for (const Path& p : paths) arr.push_back(path_to_json(p));
  return arr;
}

std::vector<Path> paths_from_json(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("paths")) throw ConfigError("family object needs \"paths\"");
    arr = &j.at("paths");
  }
  if (!arr->is_array()) throw ConfigError("family must be an array of paths");
  std::vector<Path> out;
  out.reserve(arr->size());
  for (const json& p : *arr) out.push_back(path_from_json(p));
  return out;
}

json read_json_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open " + filename);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(filename + ": " + e.what());
  }
}

std::vector<Path> read_paths_file(const std::string& filename) {
  return paths_from_json(read_json_file(filename));
}

}  // namespace bweb
