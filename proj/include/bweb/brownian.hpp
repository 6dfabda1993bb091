#pragma once

// Skeletons of coalescing Brownian motions started from a finite ordered set
// of space-time points, sampled on the grid {n h : n in Z}.
//
// Increments are exact N(0, h) draws. Hidden meetings between grid times
// are detected with the Brownian-bridge hitting probability of the gap, and
// when two walkers meet the one with the higher index follows the lower one
// from then on.

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "bweb/geometry.hpp"

namespace bweb {

struct SkeletonConfig {
  std::vector<SpaceTimePoint> starts;
  double step = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;

  // Throws ConfigError unless starts are finite, step > 0 and the horizon
  // lies beyond every start time. Repeated starts are allowed and coalesce
  // at once.
  void validate() const;

  SkeletonConfig reseeded(std::uint64_t s) const {
    SkeletonConfig c = *this;
    c.seed = s;
    return c;
  }
};

// Step used for verification runs when a config does not give one.
inline double default_step(double horizon) { return 1e-4 * horizon; }

SkeletonConfig skeleton_from_json(const nlohmann::json& j);
nlohmann::json skeleton_to_json(const SkeletonConfig& cfg);

struct CoalescenceRecord {
  std::size_t survivor = 0;  // lower index
  std::size_t absorbed = 0;  // higher index
  double meet_time = 0.0;

  friend bool operator==(const CoalescenceRecord&, const CoalescenceRecord&) = default;
};

struct SkeletonSample {
  std::vector<Path> paths;  // one per start, index-aligned with cfg.starts
  std::vector<CoalescenceRecord> records;

  PathFamily family(double dedup_tol = kDefaultDedupTol) const {
    return PathFamily(paths, dedup_tol);
  }
};

struct SkeletonOptions {
  // Stop extending paths once every walker has started and all of them have
  // coalesced into one. The stored paths then end early but agree with each
  // other exactly, which is all the counting estimators need.
  bool stop_when_coalesced = false;
};

SkeletonSample sample_skeleton(const SkeletonConfig& cfg, SkeletonOptions opts = {});

// exp(-d0 d1 / h): probability that the gap between two independent unit
// Brownian motions, observed as d0 and d1 at the ends of a step of length h,
// hits zero inside the step. Throws ConfigError on nonpositive input.
double bridge_meet_prob(double d0, double d1, double h);

// Probability that two independent Brownian motions started d apart have not
// met by time t: erf(d / (2 sqrt t)).
double theta(double d, double t);

// 1 - theta(d, t) on each grid time.
std::vector<double> pair_meeting_cdf(double d, std::span<const double> grid);

}  // namespace bweb
