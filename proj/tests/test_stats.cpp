#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bweb/checks.hpp"
#include "bweb/error.hpp"
#include "bweb/stats.hpp"

using namespace bweb;

namespace {

CoalescingSystem parity(double delta) {
  CoalescingSystem s;
  s.delta = delta;
  return s;
}

CountingQuery query(double t, double a, double b) {
  CountingQuery q;
  q.t = t;
  q.a = a;
  q.b = b;
  return q;
}

}  // namespace

TEST_CASE("verdicts") {
  EstimateReport r;
  r.estimate = 1.0;
  CHECK(r.decide().verdict == Verdict::informational);
  r.target = 1.1;
  r.tolerance = 0.2;
  r.comparison = Comparison::two_sided;
  CHECK(r.decide().verdict == Verdict::pass);
  r.tolerance = 0.05;
  CHECK(r.decide().verdict == Verdict::fail);
  r.comparison = Comparison::at_most;
  CHECK(r.decide().verdict == Verdict::pass);
  r.comparison = Comparison::at_least;
  CHECK(r.decide().verdict == Verdict::fail);
  r.verdict = Verdict::not_applicable;
  CHECK(r.decide().verdict == Verdict::not_applicable);
  CHECK(to_string(Verdict::not_applicable) == "not_applicable");
  CHECK(to_string(Comparison::at_most) == "at_most");
}

TEST_CASE("summaries") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  std::vector<double> w{1, 2, 3, 4};
  MeanSe m = mean_se(w);
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  std::vector<char> f{1, 0, 0, 1};
  MeanSe p = proportion(f);
  CHECK(p.mean == 0.5);
  CHECK(p.se == doctest::Approx(0.25));
  CHECK(normal_cdf(0) == 0.5);
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(normal_cdf(std::sqrt(2.0), 2.0) == doctest::Approx(normal_cdf(1.0)));
}

TEST_CASE("Kolmogorov-Smirnov tools") {
  std::vector<double> u;
  for (int i = 0; i < 100; ++i) u.push_back((i + 0.5) / 100.0);
  auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_one_sample(u, unif) == doctest::Approx(0.005));
  // ties: all mass at one point against a continuous law
  std::vector<double> tied(10, 0.5);
  CHECK(ks_one_sample(tied, unif) == doctest::Approx(0.5));
  CHECK(kolmogorov_q(0.1) == 1.0);
  CHECK(kolmogorov_q(1.36) == doctest::Approx(0.0505).epsilon(0.01));
  CHECK(kolmogorov_q(5.0) < 1e-20);
  KsTwoSample same = ks_two_sample(u, u);
  CHECK(same.d == 0.0);
  CHECK(same.p_value == 1.0);
  std::vector<double> shifted;
  for (double x : u) shifted.push_back(x + 0.5);
  KsTwoSample far = ks_two_sample(u, shifted);
  CHECK(far.d == doctest::Approx(0.5).epsilon(0.03));
  CHECK(far.p_value < 1e-4);
  CHECK(dkw_epsilon(10000, 0.01) == doctest::Approx(std::sqrt(std::log(200.0) / 20000.0)));
}

TEST_CASE("line fits") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  LineFit f = ols(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  std::vector<double> yo{2, 4, 6, 8};
  CHECK(fit_through_origin(x, yo).slope == doctest::Approx(2.0));
  std::vector<double> se{1, 1, 1, 1e-3};
  std::vector<double> noisy{3, 3, 3, 8};
  CHECK(fit_through_origin(x, noisy, se).slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("replica runner is independent of the worker count") {
  auto body = [](std::size_t i, std::uint64_t s) {
    return static_cast<double>(i) + rng::uniform(s);
  };
  auto one = run_replicas<double>(257, 42, RunOptions{1}, body);
  auto many = run_replicas<double>(257, 42, RunOptions{8}, body);
  CHECK(one == many);
  CHECK_THROWS_AS(run_replicas<double>(50, 1, RunOptions{4},
                                       [](std::size_t i, std::uint64_t) -> double {
                                         if (i == 17) throw ConfigError("boom");
                                         return 0.0;
                                       }),
                  ConfigError);

  const Source src = parity(0.05);
  const CountingQuery q = query(1, 0, 1);
  EstimateReport a = est_eta_mean(src, q, 400, 9, RunOptions{1});
  EstimateReport b = est_eta_mean(src, q, 400, 9, RunOptions{6});
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("standard error shrinks like one over root n") {
  const Source src = parity(0.05);
  const CountingQuery q = query(1, 0, 1);
  EstimateReport small = est_eta_mean(src, q, 1000, 3, RunOptions{4});
  EstimateReport big = est_eta_mean(src, q, 4000, 3, RunOptions{4});
  CHECK(big.std_error / small.std_error == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("degenerate intervals") {
  const Source src = parity(0.05);
  EstimateReport m = est_eta_mean(src, query(1, 0, 0), 100, 1);
  CHECK(m.estimate == 1.0);
  CHECK(m.target == 1.0);
  CHECK(m.verdict == Verdict::pass);
  EstimateReport t = est_eta_tail(src, query(1, 0, 0), 1, 100, 1);
  CHECK(t.estimate == 0.0);
  CHECK(t.verdict == Verdict::pass);
  CHECK_THROWS_AS(est_eta_mean(src, query(1, 0, 1), 10, 1), ConfigError);
  CHECK_THROWS_AS(est_eta_tail(src, query(1, 0, 1), 0, 100, 1), ConfigError);
}

TEST_CASE("wrong target fails") {
  EstimateReport r = est_eta_mean(parity(0.05), query(1, 0, 1), 500, 2, {}, 0.05, 3.0);
  CHECK(r.verdict == Verdict::fail);
}

TEST_CASE("random-walk bound at k = 1 and 2") {
  CoalescingSystem s = parity(0.1);
  EstimateReport k1 = check_rw_bound(s, query(1, 0, 0.5), 1, 300, 4);
  CHECK(k1.estimate <= 1.0);
  CHECK(k1.verdict == Verdict::pass);
  EstimateReport k2 = check_rw_bound(s, query(1, 0, 0.5), 2, 300, 4);
  CHECK(k2.verdict == Verdict::pass);
}

TEST_CASE("monotonicity") {
  std::vector<double> grid{0.25, 0.5, 1, 2};
  EstimateReport r = check_monotonicity(parity(0.1), query(1, -1, 1), grid, 200, 1);
  CHECK(r.estimate == 0.0);
  CHECK(r.verdict == Verdict::pass);
  SkeletonConfig one;
  one.starts = {{0, 0}};
  one.step = 1e-3;
  one.horizon = 3;
  EstimateReport single = check_monotonicity(one, query(1, -1, 1), grid, 20, 1);
  CHECK(single.verdict == Verdict::pass);
  CoalescingSystem crossing;
  crossing.kind = SystemKind::discrete_crossing;
  CHECK(check_monotonicity(crossing, query(1, -1, 1), grid, 20, 1).verdict ==
        Verdict::not_applicable);
}

TEST_CASE("order invariance") {
  SkeletonConfig cfg;
  cfg.starts = halton_points(10, 0, 1, -0.5, 0);
  cfg.step = 1e-3;
  cfg.horizon = 1;
  std::vector<std::size_t> identity(10);
  for (std::size_t i = 0; i < 10; ++i) identity[i] = i;
  auto same = check_order_invariance(cfg, identity, query(1, 0, 1), 100, 5, {}, true);
  CHECK(same[1].estimate == 0.0);
  CHECK(same[0].verdict == Verdict::pass);

  // far-apart starts never interact, so swapping them changes nothing
  SkeletonConfig far;
  far.starts = {{0, 0}, {1000, 0}, {0.5, 0.1}};
  far.step = 1e-3;
  far.seed = 8;
  SkeletonConfig swapped = far;
  std::swap(swapped.starts[0], swapped.starts[1]);
  SkeletonSample x = sample_skeleton(far), y = sample_skeleton(swapped);
  CHECK(x.paths[0] == y.paths[1]);
  CHECK(x.paths[1] == y.paths[0]);
}

TEST_CASE("theta oracles") {
  CHECK(std::abs(theta_quadrature(1, 1) - theta(1, 1)) < 1e-10);
  MeanSe mc = theta_monte_carlo(1, 1, 20000, 3, RunOptions{4});
  CHECK(std::abs(mc.mean - theta(1, 1)) < 3 * mc.se);
}

TEST_CASE("halton points") {
  auto pts = halton_points(4, 0, 1, 0, 1);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].x == doctest::Approx(0.5));
  CHECK(pts[0].t == doctest::Approx(1.0 / 3));
  CHECK(pts[1].x == doctest::Approx(0.25));
  CHECK(pts[1].t == doctest::Approx(2.0 / 3));
}

TEST_CASE("oscillation and Hölder fit on a linear path") {
  Path line = Path::polygonal({{0, 0}, {10, 10}});
  CHECK(oscillation(line, 1, 0.5) == doctest::Approx(0.5));
  std::vector<Path> paths{line};
  std::vector<double> lags{0.01, 0.1, 1};
  HolderOptions h;
  h.lo = 0.95;
  h.hi = 1.05;
  EstimateReport r = holder_from_paths(paths, lags, h);
  CHECK(r.estimate == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.verdict == Verdict::pass);
}

TEST_CASE("check registry") {
  auto names = check_names();
  CHECK(names.size() >= 13);
  CHECK_THROWS_AS(run_check("no_such_check", nlohmann::json::object(), 1), ConfigError);
  CHECK_THROWS_AS(run_check("check_theta", nlohmann::json{{"pionts", 1}}, 1), ConfigError);
  auto rows = run_check("check_metric_properties", nlohmann::json{{"replicas", 50}}, 1);
  CHECK(rows.size() == 7);
  for (const auto& r : rows) {
    CHECK(r.verdict == Verdict::pass);
    CHECK(r.config_digest.size() == 64);
  }
  Suite s = suite_from_json(nlohmann::json::parse(
      R"({"seed": 5, "checks": ["est_eta_mean", {"name": "check_theta", "params": {}}]})"));
  CHECK(s.seed == 5u);
  CHECK(s.checks.size() == 2);
  CHECK(s.checks[1].name == "check_theta");
}
