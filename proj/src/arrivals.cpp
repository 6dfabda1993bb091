#include "bweb/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "bweb/error.hpp"

namespace bweb {

namespace {

// Rescaled inputs such as 1 / 0.02^2 land a few ulps off the lattice.
double snap(double v) {
  const double r = std::round(v);
  return std::fabs(v - r) <= 1e-9 * std::max(1.0, std::fabs(v)) ? r : v;
}

struct Request {
  double tau;
  std::size_t slot;
};

std::vector<Request> lattice_requests(std::span<const double> times, double t0, double delta) {
  std::vector<Request> req;
  req.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0)) throw ConfigError("arrival lags must be positive");
    req.push_back({snap((t0 + times[k]) / (delta * delta)), k});
  }
  std::sort(req.begin(), req.end(),
            [](const Request& x, const Request& y) { return x.tau < y.tau; });
  return req;
}

// Sorts walkers by starting position and permutes per-walker state to match.
template <class Cluster>
void order_by_start(std::vector<double>& starts, std::vector<Cluster>& clusters) {
  std::vector<std::size_t> idx(starts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return starts[x] < starts[y]; });
  std::vector<double> s2;
  std::vector<Cluster> c2;
  for (std::size_t k : idx) {
    s2.push_back(starts[k]);
    c2.push_back(clusters[k]);
  }
  starts.swap(s2);
  clusters.swap(c2);
}

// Merges clusters with equal state; `owner` maps walkers to clusters.
template <class Cluster, class Key>
void merge_clusters(std::vector<Cluster>& clusters, std::vector<std::size_t>& owner, Key key) {
  std::vector<std::size_t> idx(clusters.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t x, std::size_t y) { return key(clusters[x]) < key(clusters[y]); });
  std::vector<std::size_t> remap(clusters.size());
  std::vector<Cluster> merged;
  merged.reserve(clusters.size());
  for (std::size_t n = 0; n < idx.size(); ++n) {
    if (n == 0 || key(clusters[idx[n]]) != key(clusters[idx[n - 1]])) {
      merged.push_back(clusters[idx[n]]);
    }
    remap[idx[n]] = merged.size() - 1;
  }
  if (merged.size() == clusters.size()) return;
  for (std::size_t& o : owner) o = remap[o];
  clusters.swap(merged);
}

}  // namespace

ArrivalSample lattice_arrivals(const CoalescingSystem& system, const IncrementField& field,
                               double t0, double a, double b, std::span<const double> times) {
  system.validate();
  if (system.kind == SystemKind::continuous_time) {
    throw ConfigError("use the clock field for a continuous_time system");
  }
  if (!(a <= b)) throw ConfigError("arrival interval needs a <= b");
  const double d = system.delta;
  const Window& w = system.window;
  const double tau0 = snap(t0 / (d * d));
  const double lo = snap(a / d);
  const double hi = snap(b / d);
  const auto req = lattice_requests(times, t0, d);

  ArrivalSample out;
  out.positions.assign(times.size(), {});
  if (tau0 < w.t_lo || (!req.empty() && req.back().tau > w.t_hi)) {
    throw WindowOverflow("arrival times lie outside the time window");
  }

  const auto j0 = static_cast<std::int64_t>(std::floor(tau0));
  const double frac = tau0 - static_cast<double>(j0);
  const bool parity = system.kind == SystemKind::discrete_parity;
  const std::int64_t reach = frac > 0.0 ? field.law().max_abs_step() : 0;

  std::vector<std::int64_t> sites;
  for (auto i = static_cast<std::int64_t>(std::floor(lo)) - reach;
       i <= static_cast<std::int64_t>(std::ceil(hi)) + reach; ++i) {
    if (parity && ((i + j0) % 2 != 0)) continue;
    const double x = frac > 0.0 ? static_cast<double>(i) + frac * field(i, j0)
                                : static_cast<double>(i);
    if (x < lo || x > hi) continue;
    if (!w.contains_x(static_cast<double>(i))) {
      throw WindowOverflow("arrival interval lies outside the spatial window");
    }
    out.starts.push_back(x * d);
    sites.push_back(i);
  }
  order_by_start(out.starts, sites);

  std::vector<std::int64_t> cl = sites;
  std::vector<std::size_t> owner(sites.size());
  std::iota(owner.begin(), owner.end(), std::size_t{0});

  std::size_t next = 0;
  for (std::int64_t j = j0; next < req.size(); ++j) {
    while (next < req.size() && req[next].tau < static_cast<double>(j + 1)) {
      const double g = req[next].tau - static_cast<double>(j);
      std::vector<double>& row = out.positions[req[next].slot];
      row.resize(owner.size());
      for (std::size_t k = 0; k < owner.size(); ++k) {
        const std::int64_t i = cl[owner[k]];
        const double x = g > 0.0 ? static_cast<double>(i) + g * field(i, j)
                                 : static_cast<double>(i);
        row[k] = x * d;
      }
      ++next;
    }
    if (next == req.size()) break;
    for (std::int64_t& i : cl) {
      i += field(i, j);
      if (!w.contains_x(static_cast<double>(i))) {
        throw WindowOverflow("walker left the spatial window at time " + std::to_string(j + 1));
      }
    }
    if (cl.size() > 1) merge_clusters(cl, owner, [](std::int64_t i) { return i; });
  }
  return out;
}

ArrivalSample lattice_arrivals(const CoalescingSystem& system, const ClockField& clocks,
                               double t0, double a, double b, std::span<const double> times) {
  system.validate();
  if (system.kind != SystemKind::continuous_time) {
    throw ConfigError("clock-driven arrivals need a continuous_time system");
  }
  if (!(a <= b)) throw ConfigError("arrival interval needs a <= b");
  const double d = system.delta;
  const Window& w = system.window;
  const double tau0 = t0 / (d * d);
  const double lo = snap(a / d);
  const double hi = snap(b / d);
  const auto req = lattice_requests(times, t0, d);

  ArrivalSample out;
  out.positions.assign(times.size(), {});
  if (tau0 < w.t_lo || (!req.empty() && req.back().tau > w.t_hi)) {
    throw WindowOverflow("arrival times lie outside the time window");
  }

  // Current segment (x0, s0) -> (dest, arrival); the event of `dest` at
  // `arrival` decides the next jump.
  struct Seg {
    double x0, s0;
    std::int64_t dest;
    ClockEvent arrival;
  };
  auto arrival_at = [&](std::int64_t site, double after) {
    if (!w.contains_x(static_cast<double>(site))) {
      throw WindowOverflow("walker left the spatial window");
    }
    const auto e = clocks.next_event(site, after, false, w.t_hi);
    if (!e) throw WindowOverflow("clock window exhausted before the horizon");
    return *e;
  };

  std::vector<Seg> segs;
  // Walkers at rest on a site.
  for (auto i = static_cast<std::int64_t>(std::ceil(lo));
       i <= static_cast<std::int64_t>(std::floor(hi)); ++i) {
    out.starts.push_back(static_cast<double>(i) * d);
    segs.push_back({static_cast<double>(i), tau0, i, arrival_at(i, tau0)});
  }
  // Segments in flight at tau0. A departure from i towards i + dir at time
  // T < tau0 is still moving iff i + dir has no event in (T, tau0].
  constexpr double kLookback = 64.0;
  for (auto i = static_cast<std::int64_t>(std::floor(lo)) - 1;
       i <= static_cast<std::int64_t>(std::ceil(hi)) + 1; ++i) {
    for (int dir : {-1, 1}) {
      const std::int64_t dest = i + dir;
      const auto last = clocks.last_event(dest, tau0, tau0 - kLookback);
      const double since = last ? last->time : tau0 - kLookback;
      std::optional<ClockEvent> land;
      for (const ClockEvent& e : clocks.events(i, since, tau0)) {
        if (e.time <= since || e.direction != dir) continue;
        if (!land) land = arrival_at(dest, tau0);
        const double x = static_cast<double>(i) +
                         dir * (tau0 - e.time) / (land->time - e.time);
        if (x < lo || x > hi) continue;
        out.starts.push_back(x * d);
        segs.push_back({static_cast<double>(i), e.time, dest, *land});
      }
    }
  }
  order_by_start(out.starts, segs);

  std::vector<std::size_t> owner(segs.size());
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  auto key = [](const Seg& s) { return std::tuple(s.x0, s.s0, s.dest, s.arrival.time); };

  for (const Request& r : req) {
    for (Seg& s : segs) {
      while (s.arrival.time <= r.tau) {
        const std::int64_t from = s.dest;
        const double at = s.arrival.time;
        s.dest = from + s.arrival.direction;
        s.arrival = arrival_at(s.dest, at);
        s.x0 = static_cast<double>(from);
        s.s0 = at;
      }
    }
    if (segs.size() > 1) merge_clusters(segs, owner, key);
    std::vector<double>& row = out.positions[r.slot];
    row.resize(owner.size());
    for (std::size_t k = 0; k < owner.size(); ++k) {
      const Seg& s = segs[owner[k]];
      const double x = s.x0 + (static_cast<double>(s.dest) - s.x0) * (r.tau - s.s0) /
                                  (s.arrival.time - s.s0);
      row[k] = x * d;
    }
  }
  return out;
}

ArrivalSample lattice_arrivals(const CoalescingSystem& system, double t0, double a, double b,
                               std::span<const double> times) {
  if (system.kind == SystemKind::continuous_time) {
    return lattice_arrivals(system, system.clocks(), t0, a, b, times);
  }
  return lattice_arrivals(system, system.increments(), t0, a, b, times);
}

}  // namespace bweb
