#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "bweb/brownian.hpp"
#include "bweb/checks.hpp"
#include "bweb/counting.hpp"
#include "bweb/error.hpp"
#include "bweb/geometry.hpp"
#include "bweb/json_io.hpp"
#include "bweb/report_io.hpp"
#include "bweb/walks.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace bweb;

namespace {

// Configs cross the boundary as JSON text; the Python wrapper handles dicts.
json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

py::dict count_dict(const CountResult& c) {
  py::dict d;
  d["eta"] = c.eta;
  d["eta_hat"] = c.eta_hat();
  d["l"] = c.l;
  d["r"] = c.r;
  d["n"] = c.n;
  d["n_plus"] = c.n_plus;
  d["n_minus"] = c.n_minus;
  return d;
}

CountingQuery make_query(double t0, double t, double a, double b, double match_tol) {
  CountingQuery q{t0, t, a, b, match_tol};
  q.validate();
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coalescing walks, Brownian skeletons and counting statistics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<WindowOverflow>(m, "WindowOverflow", PyExc_RuntimeError);

  m.def("phi", &phi, py::arg("x"), py::arg("t"));
  m.def("psi", &psi, py::arg("t"));
  m.def(
      "rho",
      [](std::pair<double, double> p, std::pair<double, double> q) {
        return rho({p.first, p.second}, {q.first, q.second});
      },
      py::arg("p"), py::arg("q"));

  py::class_<Path>(m, "Path")
      .def_static(
          "polygonal",
          [](const std::vector<std::pair<double, double>>& knots) {
            std::vector<Knot> k;
            for (auto [t, x] : knots) k.push_back({t, x});
            return Path::polygonal(std::move(k));
          },
          py::arg("knots"), "Knots as (t, x) pairs with increasing t.")
      .def_static(
          "from_minus_infinity",
          [](const std::vector<std::pair<double, double>>& knots) {
            std::vector<Knot> k;
            for (auto [t, x] : knots) k.push_back({t, x});
            return Path::from_minus_infinity(std::move(k));
          },
          py::arg("knots"))
      .def_static("constant", &Path::constant, py::arg("value"), py::arg("start"))
      .def_static(
          "sentinel",
          [](int sign, double start) {
            if (sign == 0) throw ConfigError("sentinel sign must be +1 or -1");
            return Path::sentinel(sign > 0 ? Sentinel::plus_infinity : Sentinel::minus_infinity,
                                  start);
          },
          py::arg("sign"), py::arg("start"))
      .def_property_readonly("start_time", &Path::start_time)
      .def_property_readonly("is_sentinel", &Path::is_sentinel)
      .def_property_readonly("knots",
                             [](const Path& p) {
                               std::vector<std::pair<double, double>> out;
                               for (const Knot& k : p.knots()) out.emplace_back(k.t, k.x);
                               return out;
                             })
      .def("__call__", [](const Path& p, double t) { return p(t); }, py::arg("t"))
      .def("__eq__", [](const Path& a, const Path& b) { return a == b; })
      .def("to_json", [](const Path& p) { return path_to_json(p).dump(); })
      .def("__repr__", [](const Path& p) { return "Path(" + path_to_json(p).dump() + ")"; });

  m.def("path_metric", &path_metric, py::arg("p"), py::arg("q"),
        py::arg("tol") = kDefaultMetricTol);
  m.def(
      "hausdorff",
      [](const std::vector<Path>& a, const std::vector<Path>& b, double tol) {
        return hausdorff(a, b, tol);
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = kDefaultMetricTol);
  m.def(
      "dedup",
      [](std::vector<Path> paths, double tol) {
        PathFamily f(std::move(paths), tol);
        return std::vector<Path>(f.begin(), f.end());
      },
      py::arg("paths"), py::arg("tol") = kDefaultDedupTol);

  m.def(
      "simulate_lattice",
      [](const std::string& system, const std::vector<std::pair<std::int64_t, std::int64_t>>& starts,
         std::int64_t horizon, bool rescaled) {
        const CoalescingSystem sys = system_from_json(parse(system));
        std::vector<LatticePoint> pts;
        for (auto [i, j] : starts) pts.push_back({i, j});
        PathFamily fam = sys.kind == SystemKind::discrete_crossing
                             ? simulate_crossing(sys, pts, horizon)
                             : simulate_discrete(sys, pts, horizon);
        if (rescaled) fam = rescale(fam, sys.delta);
        return std::vector<Path>(fam.begin(), fam.end());
      },
      py::arg("system"), py::arg("starts"), py::arg("horizon"), py::arg("rescaled") = true,
      "Simulate a discrete system (JSON text) from lattice starts (site, step).");
  m.def(
      "simulate_continuous",
      [](const std::string& system, const std::vector<std::pair<std::int64_t, double>>& starts,
         double horizon, bool rescaled) {
        const CoalescingSystem sys = system_from_json(parse(system));
        std::vector<ContinuousStart> pts;
        for (auto [i, t] : starts) pts.push_back({i, t});
        PathFamily fam = simulate_continuous(sys, pts, horizon);
        if (rescaled) fam = rescale(fam, sys.delta);
        return std::vector<Path>(fam.begin(), fam.end());
      },
      py::arg("system"), py::arg("starts"), py::arg("horizon"), py::arg("rescaled") = true);
  m.def(
      "sample_skeleton",
      [](const std::vector<std::pair<double, double>>& starts, double step, double horizon,
         std::uint64_t seed) {
        SkeletonConfig cfg;
        for (auto [x, t] : starts) cfg.starts.push_back({x, t});
        cfg.step = step;
        cfg.horizon = horizon;
        cfg.seed = seed;
        SkeletonSample s = sample_skeleton(cfg);
        std::vector<std::tuple<std::size_t, std::size_t, double>> recs;
        for (const auto& r : s.records) recs.emplace_back(r.survivor, r.absorbed, r.meet_time);
        return py::make_tuple(s.paths, recs);
      },
      py::arg("starts"), py::arg("step") = 1e-4, py::arg("horizon") = 1.0,
      py::arg("seed") = 0,
      "Returns (paths, records); records are (survivor, absorbed, meet_time).");

  m.def("theta", &theta, py::arg("d"), py::arg("t"));
  m.def("bridge_meet_prob", &bridge_meet_prob, py::arg("d0"), py::arg("d1"), py::arg("h"));
  m.def(
      "pair_meeting_cdf",
      [](double d, const std::vector<double>& grid) { return pair_meeting_cdf(d, grid); },
      py::arg("d"), py::arg("grid"));

  m.def(
      "count",
      [](const std::vector<Path>& family, double t0, double t, double a, double b,
         double match_tol) { return count_dict(count(family, make_query(t0, t, a, b, match_tol))); },
      py::arg("family"), py::arg("t0"), py::arg("t"), py::arg("a"), py::arg("b"),
      py::arg("match_tol") = 0.0);

  m.def("check_names", &check_names);
  m.def(
      "run_check",
      [](const std::string& name, const std::string& params, std::uint64_t seed,
         unsigned workers, std::optional<std::size_t> replicas) {
        std::vector<EstimateReport> rows;
        {
          py::gil_scoped_release release;
          rows = run_check(name, parse(params), seed, RunOptions{workers}, replicas);
        }
        std::vector<std::string> out;
        for (const auto& r : rows) out.push_back(report_to_json(r).dump());
        return out;
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("seed") = 1, py::arg("workers") = 1,
      py::arg("replicas") = std::nullopt, "Run a named check; rows come back as JSON text.");
}
