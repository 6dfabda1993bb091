#include "cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "bweb/brownian.hpp"
#include "bweb/checks.hpp"
#include "bweb/counting.hpp"
#include "bweb/digest.hpp"
#include "bweb/error.hpp"
#include "bweb/json_io.hpp"
#include "bweb/report_io.hpp"
#include "bweb/walks.hpp"
#include "cli/manifest.hpp"
#include "cli/svg.hpp"

#ifndef BWEB_VERSION
#define BWEB_VERSION "0.0.0"
#endif

namespace bweb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

inline constexpr const char* kCountsSchema = "bweb.counts/1";

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out = "out";
  unsigned workers = 1;
  std::size_t replicas = 0;  // 0: per-check default
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "Run seed (u64)");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--replicas", c.replicas, "Override replica counts");
}

std::string read_text(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    throw ConfigError("malformed JSON in " + what + ": " + msg);
  }
}

RunManifest start_manifest(const std::vector<std::string>& args, const std::string& digest,
                           std::uint64_t seed) {
  RunManifest m;
  m.command_line = args;
  m.config_digest = digest;
  m.seed = seed;
  m.tool_version = BWEB_VERSION;
  m.started_at = utc_timestamp();
  return m;
}

std::string knots_csv(std::span<const Path> paths) {
  std::ostringstream os;
  os << "path,t,x\n";
  for (std::size_t k = 0; k < paths.size(); ++k) {
    for (const Knot& kn : paths[k].knots()) {
      os << k << ',' << format_number(kn.t) << ',' << format_number(kn.x) << '\n';
    }
  }
  return os.str();
}

std::pair<std::int64_t, std::int64_t> int_range(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be [lo, hi]");
  const auto lo = j[0].get<std::int64_t>();
  const auto hi = j[1].get<std::int64_t>();
  if (lo > hi) throw ConfigError(std::string(what) + " needs lo <= hi");
  return {lo, hi};
}

std::vector<Path> owned(const PathFamily& f) { return {f.begin(), f.end()}; }

// Lattice family for the simulate config: {"system", "starts" | "box", "horizon",
// "rescale"}.
std::vector<Path> simulate_lattice(const json& cfg, const CoalescingSystem& sys) {
  const Window& w = sys.window;
  std::int64_t x_lo, x_hi, t_lo, t_hi;
  if (cfg.contains("box")) {
    const json& b = cfg.at("box");
    std::tie(x_lo, x_hi) = int_range(b.at("x"), "box.x");
    std::tie(t_lo, t_hi) = int_range(b.at("t"), "box.t");
  } else if (std::isfinite(w.x_lo) && std::fabs(w.x_hi - w.x_lo) < 1e7 &&
             std::fabs(w.t_hi - w.t_lo) < 1e7) {
    x_lo = static_cast<std::int64_t>(std::ceil(w.x_lo));
    x_hi = static_cast<std::int64_t>(std::floor(w.x_hi));
    t_lo = static_cast<std::int64_t>(std::ceil(w.t_lo));
    t_hi = static_cast<std::int64_t>(std::floor(w.t_hi));
  } else if (!cfg.contains("starts")) {
    throw ConfigError("simulate needs 'starts', a 'box', or a finite window");
  } else {
    x_lo = x_hi = t_lo = t_hi = 0;
  }
  const double horizon = cfg.value("horizon", static_cast<double>(t_hi));

  std::vector<Path> paths;
  if (sys.kind == SystemKind::continuous_time) {
    std::vector<ContinuousStart> starts;
    if (cfg.contains("starts")) {
      for (const json& s : cfg.at("starts")) starts.push_back({s.at(0), s.at(1)});
    } else {
      for (std::int64_t i = x_lo; i <= x_hi; ++i) starts.push_back({i, static_cast<double>(t_lo)});
    }
    paths = owned(simulate_continuous(sys, starts, horizon));
  } else {
    std::vector<LatticePoint> starts;
    if (cfg.contains("starts")) {
      for (const json& s : cfg.at("starts")) starts.push_back({s.at(0), s.at(1)});
    } else {
      const auto last = std::min<std::int64_t>(t_hi, std::llround(std::ceil(horizon)) - 1);
      for (std::int64_t j = t_lo; j <= last; ++j) {
        for (std::int64_t i = x_lo; i <= x_hi; ++i) {
          if (sys.kind == SystemKind::discrete_parity && (i + j) % 2 != 0) continue;
          starts.push_back({i, j});
        }
      }
    }
    paths = owned(simulate_discrete(sys, starts, static_cast<std::int64_t>(std::llround(horizon))));
  }
  if (cfg.value("rescale", false)) paths = rescale(paths, sys.delta);
  return paths;
}

int cmd_simulate(const Common& c, bool svg, const std::vector<std::string>& args,
                 std::ostream& out) {
  const std::string text = read_text(c.config);
  const json cfg = parse_json(text, c.config);
  if (!cfg.is_object()) throw ConfigError("simulate config must be an object");
  std::vector<Path> paths;
  json records;
  try {
    if (cfg.contains("skeleton")) {
      SkeletonConfig sk = skeleton_from_json(cfg.at("skeleton"));
      if (c.seed_given) sk.seed = c.seed;
      SkeletonSample s = sample_skeleton(sk);
      // Index-aligned with the starts so the records stay meaningful.
      paths = std::move(s.paths);
      records = json::array();
      for (const auto& r : s.records) {
        records.push_back(
            {{"survivor", r.survivor}, {"absorbed", r.absorbed}, {"meet_time", r.meet_time}});
      }
    } else if (cfg.contains("system")) {
      CoalescingSystem sys = system_from_json(cfg.at("system"));
      if (c.seed_given) sys.seed = c.seed;
      paths = simulate_lattice(cfg, sys);
    } else {
      throw ConfigError("simulate config needs 'system' or 'skeleton'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed simulate config: ") + e.what());
  }
  OutputDir dir(c.out);
  json fam = paths_to_json(paths);
  if (!records.is_null()) fam = json{{"paths", std::move(fam)}, {"coalescence", records}};
  dir.write("family.json", fam.dump(1) + "\n");
  dir.write("knots.csv", knots_csv(paths));
  if (svg) dir.write("family.svg", render_paths_svg(owned(PathFamily(paths))));
  dir.finish(start_manifest(args, sha256_hex(text), c.seed));
  out << paths.size() << " paths written to " << c.out << "\n";
  return 0;
}

std::vector<CountingQuery> queries_from(const json& j) {
  const json* list = &j;
  if (j.is_object() && j.contains("queries")) list = &j.at("queries");
  std::vector<CountingQuery> out;
  if (list->is_array()) {
    for (const json& q : *list) out.push_back(counting_query_from_json(q));
  } else {
    out.push_back(counting_query_from_json(*list));
  }
  return out;
}

int cmd_count(const Common& c, const std::string& family_file, std::string query_file,
              const std::vector<std::string>& args, std::ostream& out) {
  if (query_file.empty()) query_file = c.config;
  if (family_file.empty() || query_file.empty()) {
    throw ConfigError("count needs --family and --query");
  }
  const std::vector<Path> family = read_paths_file(family_file);
  const std::string qtext = read_text(query_file);
  const auto queries = queries_from(parse_json(qtext, query_file));

  std::ostringstream os;
  os << "schema,query,t0,t,a,b,eta,eta_hat,l,r,n,n_plus,n_minus\n";
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const CountingQuery& q = queries[k];
    const CountResult r = count(family, q);
    os << kCountsSchema << ',' << k << ',' << format_number(q.t0) << ',' << format_number(q.t)
       << ',' << format_number(q.a) << ',' << format_number(q.b) << ',' << r.eta << ','
       << r.eta_hat() << ',' << (r.empty() ? "" : format_number(r.l)) << ','
       << (r.empty() ? "" : format_number(r.r)) << ',' << r.n.size() << ','
       << r.n_plus.size() << ',' << r.n_minus.size() << '\n';
  }
  OutputDir dir(c.out);
  dir.write("counts.csv", os.str());
  dir.finish(start_manifest(args, sha256_hex(read_text(family_file) + qtext), c.seed));
  out << queries.size() << " queries counted\n";
  return 0;
}

int cmd_verify(const Common& c, const std::vector<std::string>& names,
               const std::vector<std::string>& args, std::ostream& out) {
  Suite suite;
  std::string digest;
  if (!c.config.empty()) {
    const std::string text = read_text(c.config);
    suite = suite_from_json(parse_json(text, c.config));
    digest = sha256_hex(text);
  }
  for (const auto& n : names) suite.checks.push_back({n});
  if (suite.checks.empty()) throw ConfigError("verify needs --config or --check");
  for (const auto& e : suite.checks) {
    const auto known = check_names();
    if (std::find(known.begin(), known.end(), e.name) == known.end()) {
      throw ConfigError("unknown check '" + e.name + "'");
    }
  }
  const std::uint64_t seed = c.seed_given ? c.seed : suite.seed.value_or(c.seed);
  const RunOptions opts{c.workers};
  std::optional<std::size_t> replicas;
  if (c.replicas > 0) replicas = c.replicas;

  std::vector<EstimateReport> rows;
  for (std::size_t k = 0; k < suite.checks.size(); ++k) {
    const auto& e = suite.checks[k];
    auto r = run_check(e.name, e.params, rng::derive_seed(seed, k, 6), opts, replicas);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  bool ok = true;
  json arr = json::array();
  for (const auto& r : rows) {
    if (r.verdict == Verdict::fail) ok = false;
    arr.push_back(report_to_json(r));
    out << r.name << (r.series.empty() ? "" : " [" + r.series + "]")
        << (std::isnan(r.x) ? "" : " x=" + format_number(r.x)) << ": "
        << format_number(r.estimate) << " -> " << to_string(r.verdict) << "\n";
  }
  OutputDir dir(c.out);
  dir.write("reports.csv", reports_to_csv(rows));
  dir.write("reports.json", json{{"schema", kReportSchema}, {"reports", arr}}.dump(1) + "\n");
  dir.finish(start_manifest(args, digest, seed));
  return ok ? 0 : 1;
}

std::vector<Curve> counts_curves(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  Curve c{"eta", {}, {}, {}};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13 || f[0] != kCountsSchema) throw ConfigError("malformed counts row");
    c.x.push_back(std::stod(f[1]));
    c.y.push_back(std::stod(f[6]));
    c.err.push_back(0.0);
  }
  if (c.x.empty()) throw ConfigError("counts CSV has no rows");
  return {c};
}

int cmd_plot(const Common& c, std::string input, bool log_x, bool linear_x,
             const std::vector<std::string>& args, std::ostream& out) {
  if (input.empty()) input = c.config;
  if (input.empty()) throw ConfigError("plot needs --input");
  const std::string text = read_text(input);
  const std::string header = text.substr(0, text.find('\n'));
  std::vector<Curve> curves;
  std::string title = "counts", x_label = "query";
  if (header.rfind("schema,query,", 0) == 0) {
    curves = counts_curves(text);
    linear_x = true;
  } else {
    const auto rows = reports_from_csv(text);
    if (rows.empty()) throw ConfigError("report CSV has no rows");
    // Scalar rows (no abscissa) only get plotted when nothing else has one.
    const bool any_x = std::any_of(rows.begin(), rows.end(),
                                   [](const EstimateReport& r) { return !std::isnan(r.x); });
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      if (any_x && std::isnan(r.x)) continue;
      const auto key = std::make_pair(r.name, r.series);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, curves.size()).first;
        curves.push_back({r.name + (r.series.empty() ? "" : " " + r.series), {}, {}, {}});
      }
      if (std::find(names.begin(), names.end(), r.name) == names.end()) names.push_back(r.name);
      Curve& cv = curves[it->second];
      cv.x.push_back(std::isnan(r.x) ? static_cast<double>(cv.x.size()) : r.x);
      cv.y.push_back(r.estimate);
      cv.err.push_back(r.std_error);
    }
    title.clear();
    for (const auto& n : names) title += (title.empty() ? "" : ", ") + n;
    x_label = "x";
  }
  bool all_positive = true;
  for (const auto& cv : curves) {
    for (double x : cv.x) all_positive = all_positive && x > 0;
  }
  const bool use_log = log_x || (!linear_x && all_positive);
  if (log_x && !all_positive) {
    out << "note: non-positive abscissae are left out of the log axis\n";
  }
  OutputDir dir(c.out);
  dir.write("plot.svg", render_curves_svg(curves, title, x_label, use_log));
  dir.finish(start_manifest(args, sha256_hex(text), c.seed));
  out << curves.size() << " curves plotted\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coalescing walks, Brownian web skeletons and their counting statistics", "bweb"};
  app.set_version_flag("--version", BWEB_VERSION);
  app.require_subcommand(1);

  Common c;
  bool svg = false;
  auto* sim = app.add_subcommand("simulate", "Simulate a lattice system or a skeleton");
  add_common(sim, c, true);
  sim->add_flag("--svg", svg, "Also render the family as SVG");

  std::string family, query;
  auto* cnt = app.add_subcommand("count", "Count arrivals for queries on a path family");
  add_common(cnt, c, false);
  cnt->add_option("--family", family, "Path family JSON");
  cnt->add_option("--query", query, "Query JSON (object, array, or {\"queries\": [...]})");

  std::vector<std::string> checks;
  auto* ver = app.add_subcommand("verify", "Run named checks and write a report");
  add_common(ver, c, false);
  ver->add_option("--check", checks, "Check name (repeatable)");
  bool list = false;
  ver->add_flag("--list", list, "List check names and exit");

  std::string input;
  bool log_x = false, linear_x = false;
  auto* plt = app.add_subcommand("plot", "Plot a report or counts CSV as SVG");
  add_common(plt, c, false);
  plt->add_option("--input", input, "CSV written by verify or count");
  auto* lg = plt->add_flag("--log-x", log_x, "Force a log x axis");
  plt->add_flag("--linear-x", linear_x, "Force a linear x axis")->excludes(lg);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << BWEB_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  for (auto* sub : {sim, cnt, ver, plt}) {
    if (sub->parsed()) c.seed_given = sub->count("--seed") > 0;
  }

  try {
    if (*sim) return cmd_simulate(c, svg, args, out);
    if (*cnt) return cmd_count(c, family, query, args, out);
    if (*ver) {
      if (list) {
        for (const auto& n : check_names()) out << n << "\n";
        return 0;
      }
      return cmd_verify(c, checks, args, out);
    }
    return cmd_plot(c, input, log_x, linear_x, args, out);
  } catch (const WindowOverflow& e) {
    err << "error: window overflow: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bweb::cli
