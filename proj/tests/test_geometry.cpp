#include <doctest.h>

#include <cmath>
#include <vector>

#include "bweb/error.hpp"
#include "bweb/geometry.hpp"
#include "bweb/rng.hpp"

using namespace bweb;

namespace {

const double kT1 = std::tanh(1.0);

double brute_hausdorff(const std::vector<Path>& a, const std::vector<Path>& b) {
  auto directed = [](const std::vector<Path>& x, const std::vector<Path>& y) {
    double worst = 0.0;
    for (const Path& p : x) {
      double best = kInf;
      for (const Path& q : y) best = std::min(best, path_metric(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace

TEST_CASE("phi and psi") {
  CHECK(phi(0, 17.3) == 0.0);
  CHECK(phi(1, 1) == doctest::Approx(kT1 / 2).epsilon(1e-12));
  CHECK(phi(kInf, 0) == 1.0);
  CHECK(phi(-kInf, 3) == doctest::Approx(-0.25));
  CHECK(psi(0) == 0.0);
  CHECK(psi(kInf) == 1.0);
  CHECK(psi(-kInf) == -1.0);
  CHECK(psi(1) == doctest::Approx(kT1).epsilon(1e-12));
}

TEST_CASE("rho") {
  CHECK(rho({0, 0}, {0, 0}) == 0.0);
  CHECK(rho({0, 0}, {1, 0}) == doctest::Approx(kT1).epsilon(1e-12));
  CHECK(rho({3, kInf}, {-7, kInf}) == 0.0);
  CHECK(rho({1, 2}, {-3, 0.5}) == rho({-3, 0.5}, {1, 2}));
}

TEST_CASE("path construction and evaluation") {
  Path c = Path::constant(0, 0);
  CHECK(c(-5) == 0.0);
  CHECK(c(100) == 0.0);
  Path p = Path::polygonal({{0, 0}, {1, 2}});
  CHECK(p(0.5) == doctest::Approx(1.0));
  CHECK(p(-1) == 0.0);
  CHECK(p(7) == 2.0);
  CHECK(p.start_time() == 0.0);
  Path s = Path::sentinel(Sentinel::plus_infinity, -kInf);
  CHECK(s(0) == kInf);
  CHECK(s(-1e9) == kInf);
  CHECK_THROWS_AS(Path::polygonal({}), ConfigError);
  CHECK_THROWS_AS(Path::polygonal({{0, 0}, {0, 1}}), ConfigError);
  CHECK_THROWS_AS(Path::polygonal({{1, 0}, {0, 1}}), ConfigError);
  CHECK_THROWS_AS(Path::polygonal({{0, std::nan("")}}), ConfigError);
  Path m = Path::from_minus_infinity({{0, 1}, {1, 2}});
  CHECK(m.start_time() == -kInf);
  CHECK(m(-1e6) == 1.0);
}

TEST_CASE("path metric closed forms") {
  Path zero = Path::constant(0, 0);
  CHECK(path_metric(zero, zero) == 0.0);
  CHECK(path_metric(zero, Path::constant(1, 0)) == doctest::Approx(kT1).epsilon(1e-9));
  CHECK(path_metric(zero, Path::constant(0, 1)) == doctest::Approx(kT1).epsilon(1e-9));
  Path up = Path::sentinel(Sentinel::plus_infinity, 0);
  CHECK(path_metric(up, up) == 0.0);
  // Only the start-time term differs.
  CHECK(path_metric(up, Path::sentinel(Sentinel::plus_infinity, kInf)) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(path_metric(Path::sentinel(Sentinel::plus_infinity, -kInf),
                    Path::sentinel(Sentinel::minus_infinity, -kInf)) ==
        doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("path metric is a symmetric, tolerance-accurate pseudometric") {
  std::vector<Path> pool;
  std::uint64_t s = 17;
  for (int n = 0; n < 12; ++n) {
    std::vector<Knot> knots;
    double t = rng::uniform(rng::key(s, rng::Stream::start, n, 0)) * 2 - 1;
    for (int k = 0; k < 6; ++k) {
      knots.push_back({t, rng::uniform(rng::key(s, rng::Stream::start, n, k + 1)) * 4 - 2});
      t += 0.1 + rng::uniform(rng::key(s, rng::Stream::start, n, k + 50));
    }
    pool.push_back(Path::polygonal(knots));
  }
  pool.push_back(Path::sentinel(Sentinel::minus_infinity, 0.5));
  pool.push_back(Path::from_minus_infinity({{-1, 0.5}, {0.5, -1}}));
  const std::size_t n = pool.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i][j] = path_metric(pool[i], pool[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(d[i][i] == 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(d[i][j] == d[j][i]);
      // dense sampling gives a lower bound on the true value
      double sampled = std::fabs(psi(pool[i].start_time()) - psi(pool[j].start_time()));
      std::vector<double> ts{0.0};
      for (int k = 0; k <= 20000; ++k) ts.push_back(-4.0 + 12.0 * k / 20000.0);
      for (const Knot& kn : pool[i].knots()) ts.push_back(kn.t);
      for (const Knot& kn : pool[j].knots()) ts.push_back(kn.t);
      for (double t : ts) {
        const double gi = std::tanh(pool[i](t)), gj = std::tanh(pool[j](t));
        sampled = std::max(sampled, std::fabs(gi - gj) / (1 + std::fabs(t)));
      }
      CHECK(d[i][j] >= sampled - 1e-9);
      CHECK(d[i][j] <= sampled + 1e-4);
      for (std::size_t k = 0; k < n; ++k) CHECK(d[i][k] <= d[i][j] + d[j][k] + 3e-9);
    }
  }
  const double exact = path_metric(pool[0], pool[1], 1e-13);
  CHECK(path_metric(pool[0], pool[1], 1e-3) <= exact + 1e-12);
  CHECK(path_metric(pool[0], pool[1], 1e-3) >= exact - 1e-3);
  CHECK(path_metric_bounded(pool[0], pool[1], 1e-9, 0.0) > 0.0);
}

TEST_CASE("path family dedup keeps first occurrences") {
  PathFamily f({Path::constant(0, 0), Path::constant(1, 0), Path::constant(0, 0)});
  CHECK(f.size() == 2);
  CHECK(f[1](0) == 1.0);
  CHECK_FALSE(f.insert(Path::polygonal({{0, 0}, {1, 0}})));
}

TEST_CASE("hausdorff") {
  std::vector<Path> a{Path::constant(0, 0), Path::polygonal({{0, 0}, {1, 1}, {2, -1}})};
  std::vector<Path> b{Path::constant(0.5, 0), Path::constant(0, 1), a[1],
                      Path::sentinel(Sentinel::minus_infinity, 0)};
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(std::span(a).first(1), std::span(b).first(1)) ==
        doctest::Approx(path_metric(a[0], b[0])).epsilon(1e-12));
  CHECK(hausdorff(a, b) == doctest::Approx(brute_hausdorff(a, b)).epsilon(1e-9));
  CHECK(hausdorff(a, b) == hausdorff(b, a));
  std::vector<Path> empty;
  CHECK_THROWS_AS(hausdorff(empty, a), ConfigError);
}

TEST_CASE("max_deviation") {
  Path p = Path::polygonal({{0, 0}, {1, 2}, {2, -1}});
  CHECK(max_deviation(p, 0, 2, 0) == doctest::Approx(2.0));
  CHECK(max_deviation(p, 0.25, 0.75, 1.0) == doctest::Approx(0.5));
  CHECK(max_deviation(p, 1.5, 3, 0) == doctest::Approx(1.0));
}

TEST_CASE("path_touches") {
  Path c = Path::constant(0, 0);
  CHECK(path_touches(c, 0, 1));
  CHECK_FALSE(path_touches(c, 0, -1));
  CHECK(path_touches(Path::polygonal({{0, 0}, {1, 2}}), 1, 0.5));
  CHECK_FALSE(path_touches(c, 0.1, 1));
  CHECK(path_touches(c, 0.1, 1, 0.1));
}

TEST_CASE("cylinder_match") {
  std::vector<Path> K{Path::constant(0, 0)};
  SegmentQuery q;
  q.segments = {{-1, 1, false, false, 2}};
  CHECK(cylinder_match(K, q));
  SegmentQuery miss;
  miss.segments = {{1, 2, false, false, 2}};
  CHECK_FALSE(cylinder_match(K, miss));
  SegmentQuery strict = q;
  strict.constraint = StartConstraint::strict;
  strict.t0 = 0;
  CHECK_FALSE(cylinder_match(K, strict));
  strict.constraint = StartConstraint::weak;
  CHECK(cylinder_match(K, strict));
  SegmentQuery open = q;
  open.segments = {{0, 1, true, false, 2}};
  CHECK_FALSE(cylinder_match(K, open));
}
