#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cli/app.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("bweb_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string put(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string read(const fs::path& rel) const {
    std::ifstream in(dir / rel, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string out(const std::string& sub) const { return (dir / sub).string(); }
};

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  args.insert(args.begin(), "bweb");
  const int code = bweb::cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("simulate is deterministic and writes a manifest") {
  Scratch s("simulate");
  const std::string cfg = s.put(
      "sim.json",
      R"({"system":{"kind":"discrete_parity","window":{"x":[-40,40],"t":[0,40]}},"horizon":20,"box":{"x":[-10,10],"t":[0,19]}})");
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "1", "--out", s.out("a"), "--svg"}) == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "1", "--out", s.out("b"), "--svg"}) == 0);
  CHECK(s.read("a/family.json") == s.read("b/family.json"));
  CHECK(s.read("a/knots.csv") == s.read("b/knots.csv"));
  CHECK(s.read("a/family.svg") == s.read("b/family.svg"));
  const json fam = json::parse(s.read("a/family.json"));
  std::size_t polylines = 0;
  const std::string svg = s.read("a/family.svg");
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) {
    ++polylines;
  }
  CHECK(fam.size() >= 1);
  CHECK(polylines == fam.size());
  const json m = json::parse(s.read("a/manifest.json"));
  CHECK(m["seed"] == 1);
  CHECK(m["outputs"].size() == 3);
}

TEST_CASE("simulate skeleton includes coalescence records") {
  Scratch s("skeleton");
  const std::string cfg =
      s.put("sk.json", R"({"skeleton":{"starts":[[0,0],[0,0],[3,0]],"step":0.001,"horizon":1}})");
  REQUIRE(run({"simulate", "--config", cfg, "--out", s.out("o")}) == 0);
  const json fam = json::parse(s.read("o/family.json"));
  CHECK(fam["paths"].size() == 3);
  REQUIRE(fam["coalescence"].size() >= 1);
  CHECK(fam["coalescence"][0]["survivor"] == 0);
  CHECK(fam["coalescence"][0]["absorbed"] == 1);
}

TEST_CASE("malformed input exits 2 with one diagnostic line") {
  Scratch s("bad");
  const std::string cfg = s.put("bad.json", "{not json");
  std::string err;
  CHECK(run({"simulate", "--config", cfg, "--out", s.out("o")}, &err) == 2);
  CHECK(lines(err) == 1);
  CHECK(run({"simulate", "--config", s.out("missing.json"), "--out", s.out("o")}) == 2);
  CHECK(run({"frobnicate"}) == 2);
}

TEST_CASE("window overflow exits 3") {
  Scratch s("overflow");
  const std::string cfg = s.put(
      "sim.json",
      R"({"system":{"kind":"discrete_parity","window":{"x":[-2,2],"t":[0,200]}},"horizon":200,"starts":[[0,0]]})");
  CHECK(run({"simulate", "--config", cfg, "--out", s.out("o")}) == 3);
}

TEST_CASE("count writes aligned rows") {
  Scratch s("count");
  const std::string fam = s.put(
      "fam.json",
      R"([{"start":0,"knots":[[0,0]]},{"start":0,"knots":[[0,1]]}])");
  const std::string q = s.put(
      "q.json",
      R"([{"t0":0,"t":1,"a":-0.5,"b":0.5},{"t0":0,"t":1,"a":-0.5,"b":1.5},{"t0":0,"t":1,"a":5,"b":6}])");
  REQUIRE(run({"count", "--family", fam, "--query", q, "--out", s.out("o")}) == 0);
  const std::string csv = s.read("o/counts.csv");
  std::istringstream in(csv);
  std::string header, r1, r2, r3;
  std::getline(in, header);
  std::getline(in, r1);
  std::getline(in, r2);
  std::getline(in, r3);
  CHECK(header == "schema,query,t0,t,a,b,eta,eta_hat,l,r,n,n_plus,n_minus");
  auto field = [](const std::string& row, int k) {
    std::istringstream ss(row);
    std::string f;
    for (int i = 0; i <= k; ++i) std::getline(ss, f, ',');
    return f;
  };
  CHECK(field(r1, 6) == "1");
  CHECK(field(r2, 6) == "2");
  CHECK(field(r3, 6) == "0");
  CHECK(field(r3, 8).empty());
  CHECK(field(r3, 9).empty());

  json batch = json::array();
  for (int i = 0; i < 1000; ++i) batch.push_back({{"t", 1}, {"a", -0.5 + i * 1e-3}, {"b", 1.5}});
  const std::string big = s.put("big.json", batch.dump());
  REQUIRE(run({"count", "--family", fam, "--query", big, "--out", s.out("p")}) == 0);
  CHECK(lines(s.read("p/counts.csv")) == 1001);
}

TEST_CASE("verify exit codes") {
  Scratch s("verify");
  CHECK(run({"verify", "--check", "no_such_check", "--out", s.out("x")}) == 2);
  const std::string wrong = s.put(
      "wrong.json",
      R"({"checks":[{"name":"est_eta_mean","params":{"source":{"system":{"kind":"discrete_parity","delta":0.05}},"target":3.0}}]})");
  CHECK(run({"verify", "--config", wrong, "--replicas", "200", "--out", s.out("w")}) == 1);
  const std::string ok = s.put("ok.json", R"(["check_metric_properties"])");
  REQUIRE(run({"verify", "--config", ok, "--replicas", "100", "--out", s.out("o")}) == 0);
  CHECK(lines(s.read("o/reports.csv")) == 8);
  CHECK(fs::exists(s.dir / "o" / "manifest.json"));
}

TEST_CASE("verify csv does not depend on the worker count") {
  Scratch s("workers");
  const std::string suite = s.put(
      "suite.json",
      R"({"seed":7,"checks":[{"name":"est_eta_mean","params":{"source":{"system":{"kind":"discrete_parity","delta":0.05}}}},"check_monotonicity"]})");
  REQUIRE(run({"verify", "--config", suite, "--replicas", "300", "--workers", "1", "--out",
               s.out("w1")}) == 0);
  REQUIRE(run({"verify", "--config", suite, "--replicas", "300", "--workers", "8", "--out",
               s.out("w8")}) == 0);
  CHECK(s.read("w1/reports.csv") == s.read("w8/reports.csv"));
}

TEST_CASE("plot") {
  Scratch s("plot");
  const std::string empty = s.put("empty.csv", "");
  CHECK(run({"plot", "--input", empty, "--out", s.out("e")}) == 2);
  const std::string bad = s.put("bad.csv", "x,y\n1,2\n");
  CHECK(run({"plot", "--input", bad, "--out", s.out("b")}) == 2);
  const std::string suite = s.put(
      "b1.json", R"([{"name":"est_B1","params":{"source":{"system":{"kind":"discrete_parity","delta":0.05}},"eps":[0.1,0.2,0.4]}}])");
  run({"verify", "--config", suite, "--replicas", "100", "--out", s.out("r")});
  const std::string csv = (s.dir / "r" / "reports.csv").string();
  REQUIRE(run({"plot", "--input", csv, "--out", s.out("p1")}) == 0);
  REQUIRE(run({"plot", "--input", csv, "--out", s.out("p2")}) == 0);
  const std::string svg = s.read("p1/plot.svg");
  CHECK(svg == s.read("p2/plot.svg"));
  CHECK(svg.find("(log)") != std::string::npos);
}
