#pragma once

// JSON interchange for paths and families:
//   path:   {"start": number|"+inf"|"-inf", "knots": [[t, x], ...],
//            "sentinel": "none"|"+inf"|"-inf"}
//   family: [path, ...]  or  {"schema": "bweb.family/1", "paths": [path, ...]}

#include <string>
#include <vector>

#include <json.hpp>

#include "bweb/geometry.hpp"

namespace bweb {

inline constexpr const char* kFamilySchema = "bweb.family/1";

nlohmann::json encode_extended(double v);
double decode_extended(const nlohmann::json& j);

nlohmann::json path_to_json(const Path& p);
Path path_from_json(const nlohmann::json& j);

nlohmann::json paths_to_json(std::span<const Path> paths);
std::vector<Path> paths_from_json(const nlohmann::json& j);

// Reads a family file in either accepted shape; throws ConfigError on
// malformed content.
std::vector<Path> read_paths_file(const std::string& filename);

nlohmann::json read_json_file(const std::string& filename);

}  // namespace bweb
