#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bweb/arrivals.hpp"
#include "bweb/counting.hpp"
#include "bweb/error.hpp"
#include "bweb/walks.hpp"

using namespace bweb;

namespace {

std::vector<Path> two_constants() { return {Path::constant(0, 0), Path::constant(1, 0)}; }

std::vector<Path> merging() {
  return {Path::constant(0, 0), Path::polygonal({{0, 1}, {0.5, 0}, {2, 0}})};
}

CountingQuery query(double t0, double t, double a, double b) {
  CountingQuery q;
  q.t0 = t0;
  q.t = t;
  q.a = a;
  q.b = b;
  return q;
}

}  // namespace

TEST_CASE("eta examples") {
  CHECK(eta(two_constants(), query(0, 1, -0.5, 0.5)) == 1);
  CHECK(eta(two_constants(), query(0, 1, -0.5, 1.5)) == 2);
  CHECK(eta(merging(), query(0, 1, -0.5, 1.5)) == 1);
  CHECK(eta_hat(two_constants(), query(0, 1, -0.5, 1.5)) == 1);
  CHECK(eta(two_constants(), query(0, 1, 3, 4)) == 0);
  CHECK(eta_hat(two_constants(), query(0, 1, 3, 4)) == 0);
  CHECK_THROWS_AS(eta(two_constants(), query(0, 0, 0, 1)), ConfigError);
  CHECK_THROWS_AS(eta(two_constants(), query(0, 1, 1, 0)), ConfigError);
}

TEST_CASE("N set, endpoints and N plus/minus") {
  CHECK(n_set(two_constants(), query(0, 1, -0.5, 0.5)).size() == 1);
  CHECK(n_set(two_constants(), query(0, 1, -0.5, 1.5)).size() == 2);
  CHECK(n_set(merging(), query(0, 1, -0.5, 1.5)).size() == 1);
  CHECK(n_set(two_constants(), query(0, 1, 5, 6)).empty());

  auto [l, r] = l_r_endpoints(two_constants(), query(0, 1, -0.5, 1.5));
  CHECK(l == 0.0);
  CHECK(r == 1.0);
  auto [el, er] = l_r_endpoints(two_constants(), query(0, 1, 5, 6));
  CHECK(el == kInf);
  CHECK(er == -kInf);
  std::vector<Path> one{Path::constant(0.3, 0)};
  auto [sl, sr] = l_r_endpoints(one, query(0, 1, 0, 1));
  CHECK(sl == 0.3);
  CHECK(sr == 0.3);

  auto [plus, minus] = n_plus_minus(two_constants(), query(0, 1, -0.5, 1.5));
  CHECK(minus == std::vector<double>{0});
  CHECK(plus == std::vector<double>{1});
  auto [mp, mm] = n_plus_minus(merging(), query(0, 1, -0.5, 1.5));
  CHECK(mp == mm);
  CHECK(mp == n_set(merging(), query(0, 1, -0.5, 1.5)));
}

TEST_CASE("counting invariants on lattice families") {
  CoalescingSystem sys;
  sys.delta = 0.1;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sys.seed = seed;
    std::vector<LatticePoint> starts;
    for (int i = -20; i <= 20; i += 2) starts.push_back({i, 0});
    PathFamily fam = rescale(simulate_discrete(sys, starts, 200), sys.delta);
    for (double t : {0.3, 1.0, 2.0}) {
      CountingQuery q = query(0, t, -1, 1);
      CountResult c = count(fam, q);
      CHECK(c.n.size() == c.eta);
      CHECK(std::is_sorted(c.n.begin(), c.n.end()));
      for (double v : c.n_plus) CHECK(std::binary_search(c.n.begin(), c.n.end(), v));
      for (double v : c.n_minus) CHECK(std::binary_search(c.n.begin(), c.n.end(), v));
    }
  }
}

TEST_CASE("event O") {
  EventOQuery q;
  q.a = 0;
  q.t0 = 0;
  q.t = 1;
  q.eps = 0.4;
  q.eps_prime = 0.01;
  q.delta = 0.1;
  std::vector<Path> three{Path::constant(-0.4, 0), Path::constant(0, 0), Path::constant(0.4, 0)};
  CHECK(detect_O(three, q));
  std::vector<Path> left_merged{Path::constant(-0.4, 0),
                                Path::polygonal({{0, 0}, {0.5, -0.4}, {2, -0.4}}),
                                Path::constant(0.4, 0)};
  CHECK_FALSE(detect_O(left_merged, q));
  std::vector<Path> both_merged{Path::polygonal({{0, -0.4}, {0.5, 0}, {2, 0}}),
                                Path::constant(0, 0),
                                Path::polygonal({{0, 0.4}, {0.5, 0}, {2, 0}})};
  CHECK_FALSE(detect_O(both_merged, q));
  std::vector<Path> pair{Path::constant(-0.4, 0), Path::constant(0.4, 0)};
  CHECK_FALSE(detect_O(pair, q));
  q.eps_prime = 0.2;
  CHECK_THROWS_AS(detect_O(three, q), ConfigError);
}

TEST_CASE("rectangle events A and B") {
  RectEventQuery q;
  q.x0 = 0;
  q.t0 = 0;
  q.u = 1;
  q.t = 1;
  const Path flat = Path::constant(0, 0);
  const Path ramp = Path::polygonal({{0, 0}, {1, 1}, {2, 2}});
  const Path bump = Path::polygonal({{0, 0}, {0.5, 0.4}, {1, 0}});
  const Path almost = Path::polygonal({{0, 0}, {0.5, 0.95}, {1, 0}});
  const Path late = Path::polygonal({{1.5, 0}, {2, 3}});
  CHECK_FALSE(detect_A(flat, q));
  CHECK(detect_A(ramp, q));
  CHECK_FALSE(detect_A(bump, q));
  CHECK_FALSE(detect_B(flat, q));
  CHECK(detect_B(ramp, q));
  CHECK_FALSE(detect_B(bump, q));
  CHECK_FALSE(detect_B(almost, q));
  CHECK(detect_A(almost, q));
  CHECK_FALSE(detect_A(late, q));
  CHECK_FALSE(detect_B(late, q));
  for (const Path& p : {flat, ramp, bump, almost, late}) {
    if (detect_B(p, q)) CHECK(detect_A(p, q));
  }
  std::vector<Path> fam{flat, bump, ramp};
  CHECK(detect_A(fam, q));
  q.u = 0;
  CHECK_THROWS_AS(detect_A(fam, q), ConfigError);
}

TEST_CASE("lattice arrivals agree with explicit walkers") {
  CoalescingSystem sys;
  sys.delta = 0.25;
  sys.seed = 31;
  IncrementField f = sys.increments();
  // a forced early meeting and a forced split
  f.script(0, 16, 1);
  f.script(2, 16, -1);
  f.script(-2, 16, -1);
  const double t0 = 1.0;  // lattice time 16
  const double a = -1.0, b = 1.25;
  std::vector<double> lags{0.0625, 0.5, 2.0};
  ArrivalSample s = lattice_arrivals(sys, f, t0, a, b, lags);

  std::vector<LatticePoint> starts;
  for (int i = -4; i <= 5; ++i) {
    if ((i + 16) % 2 == 0) starts.push_back({i, 16});
  }
  auto paths = discrete_paths(sys, f, starts, 16 + 32);
  REQUIRE(s.starts.size() == starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    CHECK(s.starts[w] == doctest::Approx(starts[w].i * 0.25));
    for (std::size_t k = 0; k < lags.size(); ++k) {
      const double lattice_t = (t0 + lags[k]) / 0.0625;
      CHECK(s.positions[k][w] == doctest::Approx(0.25 * paths[w](lattice_t)));
    }
  }
  CHECK(s.positions[0][2] == s.positions[0][3]);
}

TEST_CASE("query json") {
  auto q = counting_query_from_json(nlohmann::json::parse(R"({"t":1,"a":0,"b":2})"));
  CHECK(q.t0 == 0.0);
  CHECK(q.b == 2.0);
  CHECK_THROWS_AS(counting_query_from_json(nlohmann::json::parse(R"({"t":1})")), ConfigError);
  auto r = counting_query_from_json(counting_query_to_json(q));
  CHECK(r.t == 1.0);
}
