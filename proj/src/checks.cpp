#include "bweb/checks.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "bweb/digest.hpp"
#include "bweb/error.hpp"

namespace bweb {

using nlohmann::json;

namespace {

template <class T>
T get(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("parameter '") + key + "': " + e.what());
  }
}

CountingQuery query_param(const json& p, CountingQuery fallback) {
  if (!p.contains("query")) return fallback;
  json q = counting_query_to_json(fallback);
  q.update(p.at("query"));
  return counting_query_from_json(q);
}

json system_json(const char* kind, double delta) {
  return {{"system", {{"kind", kind}, {"delta", delta}}}};
}

Source source_param(const json& p, const json& fallback, const CountingQuery& q = {}) {
  return source_from_json(p.contains("source") ? p.at("source") : fallback, q);
}

std::size_t reps(const json& p, std::optional<std::size_t> override, std::size_t fallback) {
  if (p.contains("replicas")) return get<std::size_t>(p, "replicas", fallback);
  return override.value_or(fallback);
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}

const CoalescingSystem& lattice(const Source& src, const char* who) {
  const auto* sys = std::get_if<CoalescingSystem>(&src);
  if (!sys) throw ConfigError(std::string(who) + " needs a lattice system source");
  return *sys;
}

const SkeletonConfig& skeleton(const Source& src, const char* who) {
  const auto* cfg = std::get_if<SkeletonConfig>(&src);
  if (!cfg) throw ConfigError(std::string(who) + " needs a skeleton source");
  return *cfg;
}

json starts_json(const std::vector<SpaceTimePoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.t});
  return a;
}

CurveOptions curve_options(const json& p) {
  CurveOptions c;
  c.t0 = get(p, "t0", 0.0);
  c.threshold = get(p, "threshold", c.threshold);
  c.slope_rel_tol = get(p, "slope_rel_tol", c.slope_rel_tol);
  if (p.contains("anchors")) {
    for (const auto& a : p.at("anchors")) c.anchors.push_back({a.at(0), a.at(1)});
  }
  return c;
}

using Rows = std::vector<EstimateReport>;
using Runner = std::function<Rows(const json&, std::uint64_t, const RunOptions&,
                                  std::optional<std::size_t>)>;

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> r = {
      {"est_eta_mean",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const auto q = query_param(p, {0.0, 1.0, 0.0, 1.0, 0.0});
         const Source src = source_param(p, system_json("discrete_parity", 0.02), q);
         std::optional<double> target;
         if (p.contains("target")) target = get(p, "target", 0.0);
         return {est_eta_mean(src, q, reps(p, rr, 2000), seed, o, get(p, "rel_tol", 0.05),
                              target)};
       }},
      {"est_eta_tail",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const auto q = query_param(p, {0.0, 1.0, 0.0, 1.0, 0.0});
         const Source src = source_param(p, {{"skeleton", {{"k", 2}, {"step", 1e-4}}}}, q);
         EstimateReport r = est_eta_tail(src, q, get(p, "k", 1), reps(p, rr, 5000), seed, o,
                                         get(p, "equality", true));
         if (p.contains("target")) {
           r.target = get(p, "target", 0.0);
           r.decide();
         }
         return {r};
       }},
      {"check_rw_bound",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const auto q = query_param(p, {0.0, 1.0, 0.0, 0.5, 0.0});
         const Source src = source_param(p, system_json("discrete_parity", 0.05), q);
         Rows out;
         const json ks = p.contains("k") ? p.at("k") : json(3);
         for (const json& k : ks.is_array() ? ks : json::array({ks})) {
           out.push_back(check_rw_bound(lattice(src, "check_rw_bound"), q, k.get<int>(),
                                        reps(p, rr, 5000), seed, o));
         }
         return out;
       }},
      {"check_donsker",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(p, system_json("discrete_parity", 0.01));
         DonskerOptions d;
         d.alpha = get(p, "alpha", d.alpha);
         d.marginal_threshold = get(p, "marginal_threshold", 0.025);
         d.meeting_threshold = get(p, "meeting_threshold", 0.03);
         d.pair_gap = get(p, "pair_gap", 1.0);
         d.meeting_grid = get(p, "meeting_grid", grid(0.1, 2.0, 20));
         const auto times = get(p, "times", std::vector<double>{1.0});
         return check_donsker(lattice(src, "check_donsker"), times, reps(p, rr, 10000), seed,
                              o, d);
       }},
      {"est_B1",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(p, system_json("discrete_parity", 0.02));
         const auto eps = get(p, "eps", grid(0.08, 0.40, 9));
         return est_B1(src, get(p, "t", 1.0), eps, reps(p, rr, 4000), seed, o,
                       curve_options(p));
       }},
      {"est_B2",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(p, system_json("discrete_parity", 0.02));
         const auto eps = get(p, "eps", grid(0.08, 0.40, 9));
         return est_B2(src, get(p, "t", 1.0), eps, reps(p, rr, 4000), seed, o,
                       curve_options(p));
       }},
      {"est_B1p_B2p",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         // Lazy law with steps of 1 and 2 so both parities meet; variance 1.
         const json crossing = {
             {"system",
              {{"kind", "discrete_crossing"},
               {"delta", 0.05},
               {"increments",
                {{-2, 0.0625}, {-1, 0.25}, {0, 0.375}, {1, 0.25}, {2, 0.0625}}}}}};
         const Source src = source_param(p, crossing);
         const auto eps = get(p, "eps", std::vector<double>{0.1, 0.2, 0.3, 0.4});
         return est_B1p_B2p(src, get(p, "t", 1.0), eps, reps(p, rr, 1000), seed, o,
                            curve_options(p));
       }},
      {"est_T1",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(p, system_json("discrete_parity", 0.01));
         const auto us = get(p, "u", std::vector<double>{1.0, 1.5});
         const auto ts = get(p, "t", std::vector<double>{1.0 / 256, 1.0 / 128, 1.0 / 64});
         std::optional<ScanGrid> scan;
         if (p.contains("scan")) {
           const json& s = p.at("scan");
           scan = ScanGrid{get(s, "L", 0.0), get(s, "T", 0.0), get(s, "u", 1.0),
                           get(s, "t", 1.0)};
         }
         return est_T1(src, us, ts, reps(p, rr, 1000), seed, o, scan);
       }},
      {"est_holder",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(
             p, {{"skeleton", {{"starts", {{0.0, 0.0}}}, {"step", 1e-4}, {"horizon", 1.0}}}});
         HolderOptions h;
         h.horizon = get(p, "horizon", h.horizon);
         h.lo = get(p, "lo", h.lo);
         h.hi = get(p, "hi", h.hi);
         h.windows = get(p, "windows", h.windows);
         const auto lags = get(p, "lags", std::vector<double>{0.01, 0.02, 0.05, 0.1, 0.2});
         return {est_holder(src, lags, reps(p, rr, 200), seed, o, h)};
       }},
      {"check_order_invariance",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const auto q = query_param(p, {0.0, 1.0, 0.0, 1.0, 0.0});
         const Source src = source_param(
             p, {{"skeleton",
                  {{"starts", starts_json(halton_points(10, 0.0, 1.0, -0.5, 0.0))},
                   {"step", 1e-3},
                   {"horizon", 1.0}}}},
             q);
         const SkeletonConfig& cfg = skeleton(src, "check_order_invariance");
         std::vector<std::size_t> perm(cfg.starts.size());
         std::iota(perm.rbegin(), perm.rend(), std::size_t{0});
         perm = get(p, "permutation", perm);
         return check_order_invariance(cfg, perm, q, reps(p, rr, 2000), seed, o,
                                       get(p, "shared_seed", false), get(p, "alpha", 0.01));
       }},
      {"check_monotonicity",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const auto q = query_param(p, {0.0, 1.0, 0.0, 1.0, 0.0});
         const Source src = source_param(p, system_json("discrete_parity", 0.05), q);
         const auto ts = get(p, "t_grid", std::vector<double>{0.25, 0.5, 1.0, 2.0});
         return {check_monotonicity(src, q, ts, reps(p, rr, 1000), seed, o)};
       }},
      {"check_theta",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         std::vector<std::pair<double, double>> pts{{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.5}};
         if (p.contains("points")) {
           pts.clear();
           for (const auto& v : p.at("points")) pts.emplace_back(v.at(0), v.at(1));
         }
         return check_theta(pts, reps(p, rr, 100000), seed, o, get(p, "quad_tol", 1e-10));
       }},
      {"check_metric_properties",
       [](const json& p, std::uint64_t seed, const RunOptions&, auto rr) -> Rows {
         return check_metric_properties(reps(p, rr, 1000), seed,
                                        get(p, "tol", kDefaultMetricTol));
       }},
      {"check_skeleton_refinement",
       [](const json& p, std::uint64_t seed, const RunOptions& o, auto rr) -> Rows {
         const Source src = source_param(
             p, {{"skeleton",
                  {{"starts", starts_json(halton_points(64, -1.0, 1.0, 0.0, 0.5))},
                   {"step", 1e-3},
                   {"horizon", 1.0}}}});
         const auto ks = get(p, "ks", std::vector<std::size_t>{8, 16, 32, 64});
         return check_skeleton_refinement(skeleton(src, "check_skeleton_refinement"), ks,
                                          reps(p, rr, 10), seed, o);
       }},
  };
  return r;
}

const std::map<std::string, std::vector<std::string>>& known_params() {
  static const std::vector<std::string> curve = {"source", "eps", "t", "t0", "threshold",
                                                 "slope_rel_tol", "anchors", "replicas"};
  static const std::map<std::string, std::vector<std::string>> k = {
      {"est_eta_mean", {"query", "source", "target", "rel_tol", "replicas"}},
      {"est_eta_tail", {"query", "source", "k", "equality", "target", "replicas"}},
      {"check_rw_bound", {"query", "source", "k", "replicas"}},
      {"check_donsker",
       {"source", "alpha", "marginal_threshold", "meeting_threshold", "pair_gap",
        "meeting_grid", "times", "replicas"}},
      {"est_B1", curve},
      {"est_B2", curve},
      {"est_B1p_B2p", curve},
      {"est_T1", {"source", "u", "t", "scan", "replicas"}},
      {"est_holder", {"source", "horizon", "lo", "hi", "windows", "lags", "replicas"}},
      {"check_order_invariance",
       {"query", "source", "permutation", "shared_seed", "alpha", "replicas"}},
      {"check_monotonicity", {"query", "source", "t_grid", "replicas"}},
      {"check_theta", {"points", "quad_tol", "replicas"}},
      {"check_metric_properties", {"tol", "replicas"}},
      {"check_skeleton_refinement", {"source", "ks", "replicas"}},
  };
  return k;
}

}  // namespace

Source source_from_json(const json& j, const CountingQuery& q) {
  if (!j.is_object()) throw ConfigError("source must be an object");
  if (j.contains("system")) return system_from_json(j.at("system"));
  if (j.contains("skeleton")) {
    json s = j.at("skeleton");
    if (!s.contains("starts")) {
      const auto k = get<std::size_t>(s, "k", 2);
      s["starts"] = starts_json(interval_starts(q.a, q.b, q.t0, k));
      if (!s.contains("horizon")) s["horizon"] = q.t0 + q.t;
    }
    s.erase("k");
    return skeleton_from_json(s);
  }
  throw ConfigError("source needs a 'system' or a 'skeleton' entry");
}

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

std::vector<EstimateReport> run_check(const std::string& name, const json& params,
                                      std::uint64_t seed, const RunOptions& opts,
                                      std::optional<std::size_t> replicas) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown check '" + name + "'");
  if (!params.is_object()) throw ConfigError("parameters of '" + name + "' must be an object");
  const auto& allowed = known_params().at(name);
  for (const auto& [key, _] : params.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown parameter '" + key + "' for check '" + name + "'");
    }
  }
  auto rows = it->second(params, seed, opts, replicas);
  const json canon = {{"name", name},
                      {"params", params},
                      {"replicas", replicas ? json(*replicas) : json(nullptr)},
                      {"seed", seed}};
  const std::string digest = sha256_hex(canon.dump());
  for (auto& r : rows) r.config_digest = digest;
  return rows;
}

Suite suite_from_json(const json& j) {
  try {
    Suite s;
    const json* list = &j;
    if (j.is_object()) {
      if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
      list = &j.at("checks");
    }
    if (!list->is_array()) throw ConfigError("suite 'checks' must be an array");
    for (const json& c : *list) {
      if (c.is_string()) {
        s.checks.push_back({c.get<std::string>()});
      } else {
        SuiteEntry e{c.at("name").get<std::string>()};
        if (c.contains("params")) e.params = c.at("params");
        s.checks.push_back(std::move(e));
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed suite: ") + e.what());
  }
}

}  // namespace bweb
