#pragma once

// Named checks for suite runs. Each check reads its parameters from a JSON
// object, falls back to documented defaults, and returns report rows whose
// config_digest is the SHA-256 of the canonical (sorted-key) JSON of
// {name, params, replicas, seed}.
//
// Suite JSON: {"seed": u64?, "checks": ["name" | {"name", "params"}, ...]}.
// A check's replicas come from params.replicas, else the suite-wide override,
// else the check default.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bweb/stats.hpp"

namespace bweb {

std::vector<std::string> check_names();

std::vector<EstimateReport> run_check(const std::string& name, const nlohmann::json& params,
                                      std::uint64_t seed, const RunOptions& opts = {},
                                      std::optional<std::size_t> replicas = {});

struct SuiteEntry {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct Suite {
  std::optional<std::uint64_t> seed;
  std::vector<SuiteEntry> checks;
};

Suite suite_from_json(const nlohmann::json& j);

// Source from {"system": {...}} or {"skeleton": {...}}. A skeleton without
// "starts" gets `k` (default 2) equally spaced starts on [a, b] x {t0}.
Source source_from_json(const nlohmann::json& j, const CountingQuery& q = {});

}  // namespace bweb
