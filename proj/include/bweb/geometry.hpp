#pragma once

// Compactified space-time, paths with starting times, and the metrics on
// paths and on finite families of paths.
//
// Extended reals are plain doubles carrying IEEE +/-infinity. The maps
//   Phi(x, t) = tanh(x) / (1 + |t|),   Psi(t) = tanh(t)
// send [-inf, inf]^2 into [-1, 1]^2 and every distance here is measured
// through them.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace bweb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kDefaultMetricTol = 1e-9;
inline constexpr double kDefaultDedupTol = 1e-12;

struct SpaceTimePoint {
  double x = 0.0;
  double t = 0.0;

  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
};

double phi(double x, double t);
double psi(double t);
double rho(const SpaceTimePoint& p, const SpaceTimePoint& q);

enum class Sentinel { none, plus_infinity, minus_infinity };

struct Knot {
  double t = 0.0;
  double x = 0.0;

  friend bool operator==(const Knot&, const Knot&) = default;
};

// A polygonal path (f, t0). Knot times are strictly increasing and the first
// knot sits at the start time. Before its first knot the path is held at the
// first value and after its last knot at the last value, so evaluation is
// total on [-inf, inf] and returns the hatted extension used by the metric.
//
// Sentinel paths are the constant boundary paths f = +inf or f = -inf; they
// carry a start time but no knots.
class Path {
 public:
  // Throws ConfigError unless the knots are nonempty, finite and strictly
  // increasing in time. The start time is the first knot's time.
  static Path polygonal(std::vector<Knot> knots);
  // A path whose start time is -inf and whose value is constant up to the
  // first knot.
  static Path from_minus_infinity(std::vector<Knot> knots);
  static Path constant(double value, double start);
  static Path sentinel(Sentinel kind, double start);

  double start_time() const { return start_; }
  Sentinel sentinel_kind() const { return sentinel_; }
  bool is_sentinel() const { return sentinel_ != Sentinel::none; }
  std::span<const Knot> knots() const { return knots_; }

  // f-hat(t); see class comment.
  double operator()(double t) const;

  friend bool operator==(const Path&, const Path&) = default;

 private:
  Path(double start, std::vector<Knot> knots, Sentinel sentinel);

  double start_;
  std::vector<Knot> knots_;
  Sentinel sentinel_;
};

inline double path_eval(const Path& p, double t) { return p(t); }

// d(p, q) to within `tol`. The result is a lower bound on the true distance
// that is never more than `tol` below it.
double path_metric(const Path& p, const Path& q, double tol = kDefaultMetricTol);

// Same computation, but gives up as soon as the distance is known to exceed
// `cutoff`, returning some value strictly greater than `cutoff`. Results at
// or below the cutoff are identical to path_metric's.
double path_metric_bounded(const Path& p, const Path& q, double tol, double cutoff);

// A finite set of paths, deduplicated under d at tolerance `dedup_tol`.
// Insertion order of first occurrences is preserved.
class PathFamily {
 public:
  PathFamily() = default;
  explicit PathFamily(std::vector<Path> paths, double dedup_tol = kDefaultDedupTol);

  // Returns false when an equivalent path is already present.
  bool insert(Path p);

  std::span<const Path> paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }
  bool empty() const { return paths_.empty(); }
  double dedup_tol() const { return dedup_tol_; }
  const Path& operator[](std::size_t i) const { return paths_[i]; }

  auto begin() const { return paths_.begin(); }
  auto end() const { return paths_.end(); }

 private:
  std::vector<Path> paths_;
  double dedup_tol_ = kDefaultDedupTol;
};

// Hausdorff distance induced by d. Throws ConfigError on an empty family.
double hausdorff(std::span<const Path> a, std::span<const Path> b,
                 double tol = kDefaultMetricTol);
inline double hausdorff(const PathFamily& a, const PathFamily& b,
                        double tol = kDefaultMetricTol) {
  return hausdorff(a.paths(), b.paths(), tol);
}

// max |f(s) - ref| over s in [lo, hi], exact for polygonal paths.
double max_deviation(const Path& p, double lo, double hi, double ref);

// True iff the path is alive at s (start <= s) and passes within tol of x.
bool path_touches(const Path& p, double x, double s, double tol = 0.0);

struct Segment {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  bool hi_open = false;
  double time = 0.0;

  bool contains(double v) const;
};

enum class StartConstraint { none, strict, weak };

// "Goes through I_1, ..., I_n", optionally restricted to paths starting after
// (strict) or no earlier than (weak) a time t0.
struct SegmentQuery {
  std::vector<Segment> segments;
  StartConstraint constraint = StartConstraint::none;
  double t0 = 0.0;
};

bool path_matches(const Path& p, const SegmentQuery& q);
bool cylinder_match(std::span<const Path> family, const SegmentQuery& q);
inline bool cylinder_match(const PathFamily& family, const SegmentQuery& q) {
  return cylinder_match(family.paths(), q);
}

}  // namespace bweb
