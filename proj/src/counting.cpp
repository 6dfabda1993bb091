#include "bweb/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bweb/error.hpp"

namespace bweb {

using nlohmann::json;

void CountingQuery::validate() const {
  if (!(t > 0.0)) throw ConfigError("counting query needs t > 0");
  if (!(a <= b)) throw ConfigError("counting query needs a <= b");
  if (!(match_tol >= 0.0)) throw ConfigError("match_tol must be >= 0");
}

void EventOQuery::validate() const {
  if (!(t > 0.0)) throw ConfigError("event O needs t > 0");
  if (!(eps_prime > 0.0) || !(eps_prime < eps / 8.0)) {
    throw ConfigError("event O needs 0 < eps' < eps / 8");
  }
  if (!(delta >= 0.0) || !(delta < t / 2.0)) throw ConfigError("event O needs 0 <= delta < t / 2");
}

void RectEventQuery::validate() const {
  if (!(u > 0.0) || !(t > 0.0)) throw ConfigError("rectangle event needs u, t > 0");
}

// ---------------------------------------------------------------------------
// arrival sets

CountResult count_arrivals(std::span<const double> starts, std::span<const double> ends,
                           double match_tol) {
  if (starts.size() != ends.size()) throw ConfigError("starts and ends differ in length");
  CountResult out;
  if (starts.empty()) return out;

  std::vector<std::size_t> idx(ends.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return ends[x] < ends[y] || (ends[x] == ends[y] && x < y);
  });
  std::vector<std::size_t> cls(ends.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k == 0 || ends[idx[k]] - ends[idx[k - 1]] > match_tol) out.n.push_back(ends[idx[k]]);
    cls[idx[k]] = out.n.size() - 1;
  }
  out.eta = out.n.size();

  out.l = *std::min_element(starts.begin(), starts.end());
  out.r = *std::max_element(starts.begin(), starts.end());
  std::vector<char> minus(out.n.size(), 0), plus(out.n.size(), 0);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (starts[k] == out.l) minus[cls[k]] = 1;
    if (starts[k] == out.r) plus[cls[k]] = 1;
  }
  for (std::size_t c = 0; c < out.n.size(); ++c) {
    if (minus[c]) out.n_minus.push_back(out.n[c]);
    if (plus[c]) out.n_plus.push_back(out.n[c]);
  }
  return out;
}

CountResult count(std::span<const Path> family, const CountingQuery& q) {
  q.validate();
  std::vector<double> starts, ends;
  for (const Path& p : family) {
    if (p.is_sentinel() || p.start_time() > q.t0) continue;
    const double x = p(q.t0);
    if (x < q.a || x > q.b) continue;
    starts.push_back(x);
    ends.push_back(p(q.t0 + q.t));
  }
  return count_arrivals(starts, ends, q.match_tol);
}

std::size_t eta(std::span<const Path> family, const CountingQuery& q) {
  return count(family, q).eta;
}

std::size_t eta_hat(std::span<const Path> family, const CountingQuery& q) {
  return count(family, q).eta_hat();
}

std::vector<double> n_set(std::span<const Path> family, const CountingQuery& q) {
  return count(family, q).n;
}

std::pair<double, double> l_r_endpoints(std::span<const Path> family, const CountingQuery& q) {
  const CountResult c = count(family, q);
  return {c.l, c.r};
}

std::pair<std::vector<double>, std::vector<double>> n_plus_minus(std::span<const Path> family,
                                                                 const CountingQuery& q) {
  CountResult c = count(family, q);
  return {std::move(c.n_plus), std::move(c.n_minus)};
}

// ---------------------------------------------------------------------------
// event O

bool detect_O(std::span<const Path> family, const EventOQuery& q) {
  q.validate();
  const double s = q.t0 + q.delta;
  const double e = q.t0 + q.t;
  const double ep = q.eps_prime;
  std::vector<double> left, mid, right;  // arrivals at t0 + t
  for (const Path& p : family) {
    if (p.is_sentinel() || !(p.start_time() < s)) continue;
    const double x = p(s);
    if (x > q.a - q.eps - ep && x < q.a - q.eps + ep) left.push_back(p(e));
    if (x > q.a - q.eps + 2 * ep && x < q.a + q.eps - 2 * ep) mid.push_back(p(e));
    if (x > q.a + q.eps - ep && x < q.a + q.eps + ep) right.push_back(p(e));
  }
  auto differs = [](const std::vector<double>& side, double v) {
    return std::any_of(side.begin(), side.end(), [v](double w) { return w != v; });
  };
  for (double m : mid) {
    if (differs(left, m) && differs(right, m)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// rectangle events

namespace {

// Breakpoints of the path inside [lo, hi]: the ends plus interior knots.
std::vector<double> breakpoints(const Path& p, double lo, double hi) {
  std::vector<double> ts{lo};
  for (const Knot& k : p.knots()) {
    if (k.t > lo && k.t < hi) ts.push_back(k.t);
  }
  if (hi > lo) ts.push_back(hi);
  return ts;
}

// Parts of [lo, hi] where |f - x0| <= w, one closed interval per linear piece.
std::vector<std::pair<double, double>> band_pieces(const Path& p, double lo, double hi,
                                                   double x0, double w) {
  std::vector<std::pair<double, double>> out;
  const auto ts = breakpoints(p, lo, hi);
  if (ts.size() == 1) {
    if (std::fabs(p(lo) - x0) <= w) out.emplace_back(lo, lo);
    return out;
  }
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double sa = ts[k], sb = ts[k + 1];
    const double va = p(sa), vb = p(sb);
    double ea = sa, eb = sb;
    if (va == vb) {
      if (std::fabs(va - x0) > w) continue;
    } else {
      // Linear v(s); solve x0 - w <= v(s) <= x0 + w.
      const double slope = (vb - va) / (sb - sa);
      double s1 = sa + (x0 - w - va) / slope;
      double s2 = sa + (x0 + w - va) / slope;
      if (s1 > s2) std::swap(s1, s2);
      ea = std::max(sa, s1);
      eb = std::min(sb, s2);
      if (ea > eb) continue;
    }
    out.emplace_back(ea, eb);
  }
  return out;
}

}  // namespace

bool detect_A(const Path& p, const RectEventQuery& q) {
  if (p.is_sentinel()) return false;
  const double lo = std::max(p.start_time(), q.t0);
  const double hi = q.t0 + q.t;
  if (lo > hi) return false;
  const auto band = band_pieces(p, lo, hi, q.x0, q.u / 4.0);
  if (band.empty()) return false;
  const double first = band.front().first;
  return max_deviation(p, first, q.t0 + 2.0 * q.t, q.x0) >= q.u / 2.0;
}

bool detect_B(const Path& p, const RectEventQuery& q) {
  if (p.is_sentinel()) return false;
  const double lo = std::max(p.start_time(), q.t0);
  const double hi = q.t0 + q.t;
  if (lo > hi) return false;
  const auto ks = p.knots();
  // On each band piece the oscillation over [t', t' + t] is piecewise
  // convex in t' with breaks at knots and knots - t, so those and the piece
  // ends are the only candidates.
  for (const auto& [ea, eb] : band_pieces(p, lo, hi, q.x0, q.u / 4.0)) {
    std::vector<double> cand{ea, eb};
    for (const Knot& k : ks) {
      if (k.t >= ea && k.t <= eb) cand.push_back(k.t);
      if (k.t - q.t >= ea && k.t - q.t <= eb) cand.push_back(k.t - q.t);
    }
    for (double s : cand) {
      if (max_deviation(p, s, s + q.t, p(s)) >= q.u) return true;
    }
  }
  return false;
}

bool detect_A(std::span<const Path> family, const RectEventQuery& q) {
  q.validate();
  return std::any_of(family.begin(), family.end(),
                     [&](const Path& p) { return detect_A(p, q); });
}

bool detect_B(std::span<const Path> family, const RectEventQuery& q) {
  q.validate();
  return std::any_of(family.begin(), family.end(),
                     [&](const Path& p) { return detect_B(p, q); });
}

// ---------------------------------------------------------------------------
// JSON

CountingQuery counting_query_from_json(const json& j) {
  try {
    CountingQuery q;
    q.t0 = j.value("t0", 0.0);
    q.t = j.at("t").get<double>();
    q.a = j.at("a").get<double>();
    q.b = j.at("b").get<double>();
    q.match_tol = j.value("match_tol", 0.0);
    q.validate();
    return q;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed counting query: ") + e.what());
  }
}

json counting_query_to_json(const CountingQuery& q) {
  return {{"t0", q.t0}, {"t", q.t}, {"a", q.a}, {"b", q.b}, {"match_tol", q.match_tol}};
}

EventOQuery event_o_query_from_json(const json& j) {
  try {
    EventOQuery q;
    q.a = j.at("a").get<double>();
    q.t0 = j.value("t0", 0.0);
    q.t = j.at("t").get<double>();
    q.eps = j.at("eps").get<double>();
    q.eps_prime = j.at("eps_prime").get<double>();
    q.delta = j.value("delta", 0.0);
    q.validate();
    return q;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed event O query: ") + e.what());
  }
}

RectEventQuery rect_query_from_json(const json& j) {
  try {
    RectEventQuery q;
    q.x0 = j.value("x0", 0.0);
    q.t0 = j.value("t0", 0.0);
    q.u = j.at("u").get<double>();
    q.t = j.at("t").get<double>();
    q.validate();
    return q;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed rectangle query: ") + e.what());
  }
}

}  // namespace bweb
