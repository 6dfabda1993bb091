#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bweb/brownian.hpp"
#include "bweb/error.hpp"
#include "bweb/rng.hpp"
#include "bweb/stats.hpp"

using namespace bweb;

TEST_CASE("theta closed form") {
  CHECK(theta(0, 1) == 0.0);
  CHECK(theta(1, 1) == doctest::Approx(0.5204998778).epsilon(1e-9));
  CHECK(theta(0.3, 2.5) == doctest::Approx(theta(0.3 / std::sqrt(2.5), 1)).epsilon(1e-12));
  CHECK(theta(0.1, 1) == doctest::Approx(std::erf(0.05)).epsilon(1e-12));
  for (auto [d, t] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.5}}) {
    CHECK(std::abs(theta(d, t) - theta_quadrature(d, t)) < 1e-10);
  }
}

TEST_CASE("pair meeting cdf") {
  std::vector<double> grid{1e-9, 1.0, 1e9};
  auto c = pair_meeting_cdf(1.0, grid);
  CHECK(c[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(1 - std::erf(0.5)).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(0.4795).epsilon(1e-4));
  CHECK(c[2] > 0.9999);
}

TEST_CASE("bridge meeting probability") {
  CHECK(bridge_meet_prob(1, 1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(bridge_meet_prob(1e-12, 1, 1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bridge_meet_prob(10, 10, 1) < 1e-40);
  CHECK_THROWS_AS(bridge_meet_prob(-0.1, 1, 1), ConfigError);

  // Brute force: difference of two Brownian motions pinned at 1 on both ends.
  const int steps = 10000;
  const std::size_t reps = 2000;
  const double h = 1.0 / steps;
  std::vector<char> hit(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    double w = 0.0;
    double lo = kInf;
    std::vector<double> free(steps + 1);
    for (int k = 1; k <= steps; ++k) {
      w += std::sqrt(2 * h) * rng::normal(rng::key(77, rng::Stream::gaussian, r, k));
      free[k] = w;
    }
    for (int k = 0; k <= steps; ++k) {
      const double s = k * h;
      lo = std::min(lo, 1.0 + free[k] - s * free[steps]);
    }
    hit[r] = lo <= 0.0;
  }
  MeanSe p = proportion(hit);
  CHECK(std::abs(p.mean - std::exp(-1.0)) < 3 * p.se + 0.01);
}

TEST_CASE("single skeleton path has Gaussian increments") {
  SkeletonConfig cfg;
  cfg.starts = {{0, 0}};
  cfg.step = 1e-4;
  cfg.horizon = 1;
  cfg.seed = 3;
  SkeletonSample s = sample_skeleton(cfg);
  REQUIRE(s.paths.size() == 1);
  std::vector<double> inc;
  auto ks = s.paths[0].knots();
  for (std::size_t i = 1; i < ks.size(); ++i) {
    inc.push_back((ks[i].x - ks[i - 1].x) / std::sqrt(ks[i].t - ks[i - 1].t));
  }
  CHECK(inc.size() >= 9999);
  const MeanSe m = mean_se(inc);
  double m2 = 0, m4 = 0;
  for (double v : inc) {
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m2 /= inc.size();
  m4 /= inc.size();
  CHECK(std::abs(m.mean) < 0.04);
  CHECK(std::abs(m2 - 1) < 0.05);
  CHECK(std::abs(m4 / (m2 * m2) - 3) < 0.25);
  CHECK(ks_one_sample(inc, [](double x) { return normal_cdf(x); }) < 0.02);
}

TEST_CASE("coincident starts coalesce at once") {
  SkeletonConfig cfg;
  cfg.starts = {{0.2, 0}, {0.2, 0}};
  cfg.step = 1e-3;
  SkeletonSample s = sample_skeleton(cfg);
  CHECK(s.family().size() == 1);
  REQUIRE(s.records.size() == 1);
  CHECK(s.records[0].survivor == 0);
  CHECK(s.records[0].absorbed == 1);
  CHECK(s.records[0].meet_time == 0.0);
}

TEST_CASE("pair survival matches theta") {
  SkeletonConfig cfg;
  cfg.starts = {{0, 0}, {1, 0}};
  cfg.step = 1e-3;
  cfg.horizon = 1;
  const std::size_t reps = 3000;
  std::vector<char> apart(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    apart[r] = sample_skeleton(cfg.reseeded(rng::derive_seed(5, r))).records.empty();
  }
  MeanSe p = proportion(apart);
  CHECK(std::abs(p.mean - theta(1, 1)) < 3 * p.se);
}

TEST_CASE("skeleton prefix property and survivor rule") {
  SkeletonConfig cfg;
  cfg.starts = halton_points(24, -1, 1, 0, 0.5);
  cfg.step = 1e-3;
  cfg.horizon = 2;
  cfg.seed = 12;
  SkeletonSample full = sample_skeleton(cfg);
  for (const auto& rec : full.records) {
    CHECK(rec.survivor < rec.absorbed);
    const double tm = rec.meet_time;
    for (double t = tm; t <= 2; t += 0.05) {
      CHECK(full.paths[rec.survivor](t) == full.paths[rec.absorbed](t));
    }
  }
  SkeletonConfig pre = cfg;
  pre.starts.resize(9);
  SkeletonSample part = sample_skeleton(pre);
  for (std::size_t i = 0; i < 9; ++i) CHECK(part.paths[i] == full.paths[i]);
}

TEST_CASE("skeleton config validation") {
  SkeletonConfig cfg;
  CHECK_THROWS_AS(sample_skeleton(cfg), ConfigError);
  cfg.starts = {{0, 2}};
  cfg.horizon = 1;
  CHECK_THROWS_AS(sample_skeleton(cfg), ConfigError);
  CHECK_THROWS_AS(skeleton_from_json(nlohmann::json::parse(R"({"starts":[[0]]})")), ConfigError);
}
