#include "bweb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

#include "bweb/error.hpp"

namespace bweb {

double phi(double x, double t) { return std::tanh(x) / (1.0 + std::fabs(t)); }

double psi(double t) { return std::tanh(t); }

double rho(const SpaceTimePoint& p, const SpaceTimePoint& q) {
  return std::max(std::fabs(phi(p.x, p.t) - phi(q.x, q.t)),
                  std::fabs(psi(p.t) - psi(q.t)));
}

// ---------------------------------------------------------------------------
// Path

Path::Path(double start, std::vector<Knot> knots, Sentinel sentinel)
    : start_(start), knots_(std::move(knots)), sentinel_(sentinel) {}

namespace {

void validate_knots(const std::vector<Knot>& knots) {
  if (knots.empty()) throw ConfigError("path needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].t) || !std::isfinite(knots[i].x)) {
      throw ConfigError("path knots must be finite");
    }
    if (i > 0 && !(knots[i].t > knots[i - 1].t)) {
      throw ConfigError("path knot times must be strictly increasing");
    }
  }
}

}  // namespace

Path Path::polygonal(std::vector<Knot> knots) {
  validate_knots(knots);
  const double start = knots.front().t;
  return Path(start, std::move(knots), Sentinel::none);
}

Path Path::from_minus_infinity(std::vector<Knot> knots) {
  validate_knots(knots);
  return Path(-kInf, std::move(knots), Sentinel::none);
}

Path Path::constant(double value, double start) {
  if (std::isnan(value) || std::isnan(start)) throw ConfigError("NaN in path");
  if (std::isinf(value)) {
    return sentinel(value > 0 ? Sentinel::plus_infinity : Sentinel::minus_infinity,
                    start);
  }
  if (start == kInf) throw ConfigError("finite path cannot start at +inf");
  if (start == -kInf) return Path(-kInf, {{0.0, value}}, Sentinel::none);
  return Path(start, {{start, value}}, Sentinel::none);
}

Path Path::sentinel(Sentinel kind, double start) {
  if (kind == Sentinel::none) throw ConfigError("sentinel kind required");
  if (std::isnan(start)) throw ConfigError("NaN start time");
  return Path(start, {}, kind);
}

double Path::operator()(double t) const {
  switch (sentinel_) {
    case Sentinel::plus_infinity:
      return kInf;
    case Sentinel::minus_infinity:
      return -kInf;
    case Sentinel::none:
      break;
  }
  if (t <= knots_.front().t) return knots_.front().x;
  if (t >= knots_.back().t) return knots_.back().x;
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double v, const Knot& k) { return v < k.t; });
  const auto lo = hi - 1;
  return lo->x + (hi->x - lo->x) * ((t - lo->t) / (hi->t - lo->t));
}

// ---------------------------------------------------------------------------
// path metric
//
// The Phi-gap g(t) = |tanh f1(t) - tanh f2(t)| / (1 + |t|) is evaluated at
// every knot time of either path and at t = 0. Outside the knot span both
// hatted paths are constant and g is monotone in |t|, so the tails add
// nothing beyond their inner endpoints. Between breakpoints both paths are
// linear and the supremum is found by branch and bound with a Lipschitz
// bound on g.

namespace {

constexpr double kSech2Lipschitz = 0.77;  // max |d/dx sech^2 x| = 4 / (3 sqrt 3)
constexpr std::size_t kMaxRefinements = 20'000'000;

double gap(double xa, double xb, double t) {
  return std::fabs(std::tanh(xa) - std::tanh(xb)) / (1.0 + std::fabs(t));
}

struct Piece {
  double t0, t1;
  double a0, a1;
  double b0, b1;

  double a(double t) const {
    return a0 == a1 ? a0 : a0 + (a1 - a0) * ((t - t0) / (t1 - t0));
  }
  double b(double t) const {
    return b0 == b1 ? b0 : b0 + (b1 - b0) * ((t - t0) / (t1 - t0));
  }
  double slope_a() const { return a0 == a1 ? 0.0 : (a1 - a0) / (t1 - t0); }
  double slope_b() const { return b0 == b1 ? 0.0 : (b1 - b0) / (t1 - t0); }
};

// Largest sech^2 over [lo, hi].
double sech2_max(double lo, double hi) {
  if (lo <= 0.0 && hi >= 0.0) return 1.0;
  const double m = std::min(std::fabs(lo), std::fabs(hi));
  if (m > 30.0) return 4.0 * std::exp(-2.0 * m);
  const double c = std::cosh(m);
  return 1.0 / (c * c);
}

double lipschitz(const Piece& pc, double l, double r) {
  const double m = std::min(std::fabs(l), std::fabs(r));
  const double sa = std::fabs(pc.slope_a());
  const double sb = std::fabs(pc.slope_b());
  const double al = pc.a(l), ar = pc.a(r), bl = pc.b(l), br = pc.b(r);
  const double dl = std::fabs(al - bl);
  const double dr = std::fabs(ar - br);
  const double spread = std::max(dl, dr);
  // Far from the origin tanh is flat, which the slope terms alone ignore.
  const double ha = sech2_max(std::min(al, ar), std::max(al, ar));
  const double hb = sech2_max(std::min(bl, br), std::max(bl, br));
  double first = sa * ha + sb * hb;
  if (std::isfinite(spread)) {
    const double tight = std::fabs(pc.slope_a() - pc.slope_b()) +
                         kSech2Lipschitz * std::min(sa, sb) * spread;
    first = std::min(first, tight);
  }
  const double lo = std::min({al, ar, bl, br});
  const double hi = std::max({al, ar, bl, br});
  double g = std::tanh(hi) - std::tanh(lo);
  if (std::isfinite(spread)) g = std::min(g, spread * sech2_max(lo, hi));
  const double w = 1.0 + m;
  return first / w + g / (w * w);
}

struct Cell {
  double l, r, gl, gr, ub;
  std::size_t piece;
};

struct CellOrder {
  bool operator()(const Cell& x, const Cell& y) const { return x.ub < y.ub; }
};

// Bound on |g''| when tanh a - tanh b keeps one sign on [l, r]; +inf
// otherwise. Both paths are linear on a piece, and 0 is always a breakpoint
// so the weight 1 / (1 + |t|) is smooth inside the cell.
double curvature(const Piece& pc, double l, double r) {
  const double al = pc.a(l), ar = pc.a(r), bl = pc.b(l), br = pc.b(r);
  const double alo = std::min(al, ar), ahi = std::max(al, ar);
  const double blo = std::min(bl, br), bhi = std::max(bl, br);
  if (!(ahi < blo || bhi < alo)) return kInf;
  const double sa = std::fabs(pc.slope_a());
  const double sb = std::fabs(pc.slope_b());
  const double ha = sech2_max(alo, ahi);
  const double hb = sech2_max(blo, bhi);
  constexpr double kSech2Tanh = 0.3849;  // max |sech^2 x tanh x|
  const double d2 = 2.0 * (sa * sa * std::min(kSech2Tanh, ha) + sb * sb * std::min(kSech2Tanh, hb));
  const double d1 = sa * ha + sb * hb;
  const double d0 = std::tanh(std::max(ahi, bhi)) - std::tanh(std::min(alo, blo));
  const double w = 1.0 + std::min(std::fabs(l), std::fabs(r));
  return d2 / w + 2.0 * d1 / (w * w) + 2.0 * d0 / (w * w * w);
}

double upper_bound_of(const Piece& pc, double l, double r, double gl, double gr) {
  const double w = r - l;
  const double first = 0.5 * (gl + gr + lipschitz(pc, l, r) * w);
  const double second = std::max(gl, gr) + curvature(pc, l, r) * w * w / 8.0;
  return std::min(first, second);
}

void collect_times(const Path& p, std::vector<double>& out) {
  for (const Knot& k : p.knots()) out.push_back(k.t);
}

double metric_impl(const Path& p, const Path& q, double tol, double cutoff) {
  if (!(tol > 0.0)) throw ConfigError("path_metric: tol must be positive");
  if (p == q) return 0.0;

  double best = std::fabs(psi(p.start_time()) - psi(q.start_time()));
  if (best > cutoff) return best;

  // Cheap probe at a few knots before building the full breakpoint mesh.
  auto probe = [&](const Path& src) {
    const auto ks = src.knots();
    if (ks.empty()) return;
    const std::size_t n = ks.size();
    for (std::size_t i : {std::size_t{0}, n / 2, n - 1}) {
      const double t = ks[i].t;
      best = std::max(best, gap(p(t), q(t), t));
    }
  };
  probe(p);
  probe(q);
  best = std::max(best, gap(p(0.0), q(0.0), 0.0));
  if (best > cutoff) return best;

  std::vector<double> times;
  times.reserve(p.knots().size() + q.knots().size() + 1);
  collect_times(p, times);
  collect_times(q, times);
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<double> xa(times.size()), xb(times.size()), g(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    xa[i] = p(times[i]);
    xb[i] = q(times[i]);
    g[i] = gap(xa[i], xb[i], times[i]);
    best = std::max(best, g[i]);
    if (best > cutoff) return best;
  }

  std::vector<Piece> pieces;
  std::priority_queue<Cell, std::vector<Cell>, CellOrder> heap;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    Piece pc{times[i], times[i + 1], xa[i], xa[i + 1], xb[i], xb[i + 1]};
    const double ub = upper_bound_of(pc, pc.t0, pc.t1, g[i], g[i + 1]);
    if (ub > best + tol) {
      pieces.push_back(pc);
      heap.push({pc.t0, pc.t1, g[i], g[i + 1], ub, pieces.size() - 1});
    }
  }

  std::size_t refinements = 0;
  while (!heap.empty()) {
    const Cell c = heap.top();
    if (c.ub <= best + tol) break;
    heap.pop();
    const Piece& pc = pieces[c.piece];
    const double mid = 0.5 * (c.l + c.r);
    if (!(mid > c.l && mid < c.r)) continue;
    const double gm = gap(pc.a(mid), pc.b(mid), mid);
    best = std::max(best, gm);
    if (best > cutoff) return best;
    if (++refinements > kMaxRefinements) break;
    const double ub_left = upper_bound_of(pc, c.l, mid, c.gl, gm);
    const double ub_right = upper_bound_of(pc, mid, c.r, gm, c.gr);
    if (ub_left > best + tol) heap.push({c.l, mid, c.gl, gm, ub_left, c.piece});
    if (ub_right > best + tol) heap.push({mid, c.r, gm, c.gr, ub_right, c.piece});
  }
  return best;
}

}  // namespace

double path_metric(const Path& p, const Path& q, double tol) {
  return metric_impl(p, q, tol, kInf);
}

double path_metric_bounded(const Path& p, const Path& q, double tol, double cutoff) {
  return metric_impl(p, q, tol, cutoff);
}

// ---------------------------------------------------------------------------
// PathFamily

PathFamily::PathFamily(std::vector<Path> paths, double dedup_tol) : dedup_tol_(dedup_tol) {
  if (!(dedup_tol >= 0.0)) throw ConfigError("dedup tolerance must be >= 0");
  paths_.reserve(paths.size());
  for (Path& p : paths) insert(std::move(p));
}

bool PathFamily::insert(Path p) {
  for (const Path& existing : paths_) {
    if (existing == p) return false;
    if (dedup_tol_ > 0.0 &&
        path_metric_bounded(existing, p, 0.5 * dedup_tol_, dedup_tol_) <= dedup_tol_) {
      return false;
    }
  }
  paths_.push_back(std::move(p));
  return true;
}

// ---------------------------------------------------------------------------
// Hausdorff

namespace {

double directed(std::span<const Path> from, std::span<const Path> to, double tol) {
  double result = 0.0;
  for (const Path& a : from) {
    double nearest = kInf;
    for (const Path& b : to) {
      const double d = path_metric_bounded(a, b, tol, nearest);
      nearest = std::min(nearest, d);
      if (nearest <= result) break;  // cannot raise the outer sup
    }
    result = std::max(result, nearest);
  }
  return result;
}

}  // namespace

double hausdorff(std::span<const Path> a, std::span<const Path> b, double tol) {
  if (a.empty() || b.empty()) throw ConfigError("hausdorff: empty path family");
  if (!(tol > 0.0)) throw ConfigError("hausdorff: tol must be positive");
  return std::max(directed(a, b, tol), directed(b, a, tol));
}

// ---------------------------------------------------------------------------
// queries

double max_deviation(const Path& p, double lo, double hi, double ref) {
  double m = std::fabs(p(lo) - ref);
  const auto ks = p.knots();
  auto it = std::upper_bound(ks.begin(), ks.end(), lo,
                             [](double v, const Knot& k) { return v < k.t; });
  for (; it != ks.end() && it->t < hi; ++it) m = std::max(m, std::fabs(it->x - ref));
  return std::max(m, std::fabs(p(hi) - ref));
}

bool path_touches(const Path& p, double x, double s, double tol) {
  if (!(p.start_time() <= s)) return false;
  const double v = p(s);
  return v == x || std::fabs(v - x) <= tol;
}

bool Segment::contains(double v) const {
  const bool above = lo_open ? v > lo : v >= lo;
  const bool below = hi_open ? v < hi : v <= hi;
  return above && below;
}

bool path_matches(const Path& p, const SegmentQuery& q) {
  switch (q.constraint) {
    case StartConstraint::strict:
      if (!(p.start_time() > q.t0)) return false;
      break;
    case StartConstraint::weak:
      if (!(p.start_time() >= q.t0)) return false;
      break;
    case StartConstraint::none:
      break;
  }
  for (const Segment& s : q.segments) {
    if (!(p.start_time() <= s.time)) return false;
    if (!s.contains(p(s.time))) return false;
  }
  return true;
}

bool cylinder_match(std::span<const Path> family, const SegmentQuery& q) {
  return std::any_of(family.begin(), family.end(),
                     [&](const Path& p) { return path_matches(p, q); });
}

}  // namespace bweb
