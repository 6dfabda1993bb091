#pragma once

// Counting functionals on finite path families: eta and eta-hat, the arrival
// sets N, N+, N- with their endpoints l and r, and the event detectors O,
// A_{t,u} and B_{t,u}. Sentinel paths never count.

#include <span>
#include <vector>

#include <json.hpp>

#include "bweb/geometry.hpp"

namespace bweb {

struct CountingQuery {
  double t0 = 0.0;
  double t = 1.0;
  double a = 0.0;
  double b = 0.0;
  double match_tol = 0.0;  // arrivals closer than this are one point

  void validate() const;  // t > 0, a <= b, match_tol >= 0
};

struct CountResult {
  std::size_t eta = 0;
  std::vector<double> n;        // N: one representative per arrival class, ascending
  std::vector<double> n_minus;  // arrivals of paths through (l, t0)
  std::vector<double> n_plus;   // arrivals of paths through (r, t0)
  double l = kInf;              // +inf / -inf when nothing touches
  double r = -kInf;

  std::size_t eta_hat() const { return eta > 0 ? eta - 1 : 0; }
  bool empty() const { return eta == 0; }
};

// Core counting step, shared with the lattice estimators: `starts[k]` is where
// path k touches [a, b] x {t0} and `ends[k]` its position at t0 + t.
CountResult count_arrivals(std::span<const double> starts, std::span<const double> ends,
                           double match_tol = 0.0);

CountResult count(std::span<const Path> family, const CountingQuery& q);
inline CountResult count(const PathFamily& family, const CountingQuery& q) {
  return count(family.paths(), q);
}

std::size_t eta(std::span<const Path> family, const CountingQuery& q);
std::size_t eta_hat(std::span<const Path> family, const CountingQuery& q);
std::vector<double> n_set(std::span<const Path> family, const CountingQuery& q);
std::pair<double, double> l_r_endpoints(std::span<const Path> family, const CountingQuery& q);
std::pair<std::vector<double>, std::vector<double>> n_plus_minus(std::span<const Path> family,
                                                                 const CountingQuery& q);

// Three paths started before t0 + delta sitting at t0 + delta in the bands
// around a - eps, a and a + eps, whose middle arrival at t0 + t differs from
// both outer ones.
struct EventOQuery {
  double a = 0.0;
  double t0 = 0.0;
  double t = 1.0;
  double eps = 0.1;
  double eps_prime = 0.01;
  double delta = 0.0;

  void validate() const;  // t > 0, 0 < eps' < eps / 8, 0 <= delta < t / 2
};

bool detect_O(std::span<const Path> family, const EventOQuery& q);

// R(x0, t0; u, t) = [x0 - u/2, x0 + u/2] x [t0, t0 + t].
struct RectEventQuery {
  double x0 = 0.0;
  double t0 = 0.0;
  double u = 1.0;
  double t = 1.0;

  void validate() const;  // u, t > 0
};

// Some path touches R(x0, t0; u/2, t) and later the sides of R(x0, t0; u, 2t).
bool detect_A(const Path& p, const RectEventQuery& q);
bool detect_A(std::span<const Path> family, const RectEventQuery& q);

// Some path touches (t', f(t')) in R(x0, t0; u/2, t) and moves by at least u
// within [t', t' + t]. Implies detect_A on the same query.
bool detect_B(const Path& p, const RectEventQuery& q);
bool detect_B(std::span<const Path> family, const RectEventQuery& q);

// JSON shapes: {"t0", "t", "a", "b", "match_tol"}; event queries carry
// "event": "O" | "A" | "B" with their own fields.
CountingQuery counting_query_from_json(const nlohmann::json& j);
nlohmann::json counting_query_to_json(const CountingQuery& q);
EventOQuery event_o_query_from_json(const nlohmann::json& j);
RectEventQuery rect_query_from_json(const nlohmann::json& j);

}  // namespace bweb
