#pragma once

// Coalescing random walks on the integer lattice.
//
// All randomness lives in fields indexed by lattice coordinates: the step
// Delta(i, j) taken by any walker standing at site i at time j, or the
// Poisson clock of site i. Walkers that share a space-time point read the
// same field values and therefore coincide from then on; coalescence is
// never applied as an explicit merge.
//
// Paths produced here are in lattice units. Use rescale() for the diffusive
// scaling x -> delta x, t -> delta^2 t.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bweb/geometry.hpp"
#include "bweb/rational.hpp"

namespace bweb {

class IncrementLaw {
 public:
  struct Atom {
    int step = 0;
    Rational p;
  };

  // Throws ConfigError unless probabilities are positive, sum to exactly 1,
  // the mean is 0 and the variance is positive.
  explicit IncrementLaw(std::vector<Atom> atoms);

  // +1 or -1 with probability 1/2 each.
  static IncrementLaw simple();

  std::span<const Atom> atoms() const { return atoms_; }
  Rational mean() const;
  Rational variance() const;
  int max_abs_step() const { return max_abs_step_; }
  bool is_simple() const;

  // Maps 64 random bits to a step by exact integer thresholds.
  int sample(std::uint64_t bits) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<std::uint64_t> cumulative_;  // numerators over common_den_
  std::uint64_t common_den_ = 1;
  int max_abs_step_ = 0;
};

struct LatticePoint {
  std::int64_t i = 0;  // site
  std::int64_t j = 0;  // time step

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

// Lazily materialized Delta(i, j). Individual values may be pinned for tests.
class IncrementField {
 public:
  IncrementField(std::uint64_t seed, IncrementLaw law);

  int operator()(std::int64_t i, std::int64_t j) const {
    if (!scripted_.empty()) {
      if (auto it = scripted_.find({i, j}); it != scripted_.end()) return it->second;
    }
    return law_.sample(rng_key(i, j));
  }

  void script(std::int64_t i, std::int64_t j, int step) { scripted_[{i, j}] = step; }

  const IncrementLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t rng_key(std::int64_t i, std::int64_t j) const;

  std::uint64_t seed_;
  IncrementLaw law_;
  std::map<LatticePoint, int> scripted_;
};

struct ClockEvent {
  double time = 0.0;
  int direction = 1;  // +1 or -1

  friend bool operator==(const ClockEvent&, const ClockEvent&) = default;
};

// Rate-1 Poisson clocks, one per site, each event carrying a fair-coin jump
// direction. Events of site i in [b, b + 1) are derived from (seed, i, b).
// A scripted site uses exactly its scripted events and nothing else.
class ClockField {
 public:
  explicit ClockField(std::uint64_t seed) : seed_(seed) {}

  void script(std::int64_t site, std::vector<ClockEvent> events);

  // Sorted events at `site` with lo <= time < hi.
  std::vector<ClockEvent> events(std::int64_t site, double lo, double hi) const;

  // First event with time > t (or >= t when `inclusive`), giving up past
  // `limit`.
  std::optional<ClockEvent> next_event(std::int64_t site, double t, bool inclusive = false,
                                       double limit = kInf) const;

  // Last event with time <= t, giving up below `limit`.
  std::optional<ClockEvent> last_event(std::int64_t site, double t,
                                       double limit = -kInf) const;

 private:
  std::vector<ClockEvent> block(std::int64_t site, std::int64_t b) const;

  std::uint64_t seed_;
  std::map<std::int64_t, std::vector<ClockEvent>> scripted_;
};

enum class SystemKind { discrete_parity, continuous_time, discrete_crossing };

std::string to_string(SystemKind kind);
SystemKind system_kind_from(const std::string& name);

// Closed space x time box in lattice units.
struct Window {
  double x_lo = -1e15;
  double x_hi = 1e15;
  double t_lo = -1e15;
  double t_hi = 1e15;

  bool contains_x(double x) const { return x >= x_lo && x <= x_hi; }
  bool contains_t(double t) const { return t >= t_lo && t <= t_hi; }
};

struct CoalescingSystem {
  SystemKind kind = SystemKind::discrete_parity;
  IncrementLaw law = IncrementLaw::simple();
  double delta = 1.0;
  Window window;
  std::uint64_t seed = 0;

  // Throws ConfigError on an inconsistent configuration (non-simple law for
  // the parity system, delta <= 0, empty window).
  void validate() const;

  IncrementField increments() const { return {seed, law}; }
  ClockField clocks() const { return ClockField(seed); }

  // The same system under another seed.
  CoalescingSystem reseeded(std::uint64_t s) const {
    CoalescingSystem c = *this;
    c.seed = s;
    return c;
  }
};

// {"kind", "increments": [[step, p], ...], "delta", "window": {"x": [lo, hi],
//  "t": [lo, hi]}, "seed"}; every field but "kind" is optional.
CoalescingSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const CoalescingSystem& s);

// Discrete-time walks (i, j) -> (i + Delta(i, j), j + 1), one path per start,
// index-aligned with `starts`. Parity is enforced for discrete_parity.
// Throws WindowOverflow when a start, the horizon, or a walker leaves the
// window.
std::vector<Path> discrete_paths(const CoalescingSystem& system, const IncrementField& field,
                                 std::span<const LatticePoint> starts, std::int64_t horizon);

PathFamily simulate_discrete(const CoalescingSystem& system,
                             std::span<const LatticePoint> starts, std::int64_t horizon);
PathFamily simulate_discrete(const CoalescingSystem& system, const IncrementField& field,
                             std::span<const LatticePoint> starts, std::int64_t horizon);

PathFamily simulate_crossing(const CoalescingSystem& system,
                             std::span<const LatticePoint> starts, std::int64_t horizon);

struct ContinuousStart {
  std::int64_t site = 0;
  double time = 0.0;
};

// Continuous-time walks built from the site clocks. A start that falls
// exactly on an event of its site yields two paths (with and without the
// initial constant segment); otherwise one. Paths run until their first knot
// at or beyond `horizon`.
std::vector<Path> continuous_paths(const CoalescingSystem& system, const ClockField& clocks,
                                   std::span<const ContinuousStart> starts, double horizon);

PathFamily simulate_continuous(const CoalescingSystem& system,
                               std::span<const ContinuousStart> starts, double horizon);
PathFamily simulate_continuous(const CoalescingSystem& system, const ClockField& clocks,
                               std::span<const ContinuousStart> starts, double horizon);

// Diffusive rescaling: knots (t, x) -> (delta^2 t, delta x). Sentinel paths
// are returned unchanged.
Path rescale(const Path& p, double delta);
std::vector<Path> rescale(std::span<const Path> paths, double delta);
PathFamily rescale(const PathFamily& family, double delta);

// The constant paths f = +inf and f = -inf started at t0 = -inf and
// t0 = +inf, plus those started at each integer in `integer_starts` (an
// inclusive range) when given.
PathFamily boundary_paths(
    std::optional<std::pair<std::int64_t, std::int64_t>> integer_starts = std::nullopt);

}  // namespace bweb
