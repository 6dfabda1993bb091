#include "bweb/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "bweb/error.hpp"
#include "bweb/rng.hpp"

namespace bweb {

using nlohmann::json;

void SkeletonConfig::validate() const {
  if (starts.empty()) throw ConfigError("skeleton needs at least one start");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("skeleton step must be positive");
  for (const SpaceTimePoint& p : starts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.t)) {
      throw ConfigError("skeleton starts must be finite");
    }
    if (!(horizon > p.t)) throw ConfigError("horizon must lie beyond every start time");
  }
}

SkeletonConfig skeleton_from_json(const json& j) {
  try {
    SkeletonConfig cfg;
    for (const json& p : j.at("starts")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("skeleton start must be [x, t]");
      cfg.starts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    cfg.horizon = j.value("horizon", 1.0);
    cfg.step = j.contains("step") ? j.at("step").get<double>() : default_step(cfg.horizon);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed skeleton config: ") + e.what());
  }
}

json skeleton_to_json(const SkeletonConfig& cfg) {
  json starts = json::array();
  for (const auto& p : cfg.starts) starts.push_back({p.x, p.t});
  return {{"starts", std::move(starts)},
          {"step", cfg.step},
          {"horizon", cfg.horizon},
          {"seed", cfg.seed}};
}

double bridge_meet_prob(double d0, double d1, double h) {
  if (!(d0 > 0.0) || !(d1 > 0.0) || !(h > 0.0)) {
    throw ConfigError("bridge_meet_prob needs positive gaps and step");
  }
  return std::exp(-d0 * d1 / h);
}

double theta(double d, double t) {
  if (!(t > 0.0)) throw ConfigError("theta: t must be positive");
  if (!(d >= 0.0)) throw ConfigError("theta: d must be nonnegative");
  return std::erf(d / (2.0 * std::sqrt(t)));
}

std::vector<double> pair_meeting_cdf(double d, std::span<const double> grid) {
  if (!(d > 0.0)) throw ConfigError("pair_meeting_cdf: d must be positive");
  std::vector<double> out;
  out.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      throw ConfigError("pair_meeting_cdf: grid must be positive and increasing");
    }
    out.push_back(1.0 - theta(d, grid[k]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// skeleton sampler

namespace {

// Beyond this exponent the bridge probability is below 1e-21 and the draw
// is skipped.
constexpr double kBridgeCutoff = 48.0;

std::uint64_t walker_key(std::uint64_t seed, const SpaceTimePoint& p) {
  return rng::key(seed, rng::Stream::start, std::bit_cast<std::int64_t>(p.x),
                  std::bit_cast<std::int64_t>(p.t));
}

struct Walker {
  std::uint64_t key = 0;
  std::int64_t first_step = 0;  // grid step containing the start time
  bool started = false;
  std::size_t parent = 0;
  // Segment over the current step (meaningful for cluster representatives).
  double s0 = 0.0, x0 = 0.0, x1 = 0.0;

  double at(double s, double g1) const {
    return s <= s0 ? x0 : x0 + (x1 - x0) * ((s - s0) / (g1 - s0));
  }
};

std::size_t find(std::vector<Walker>& w, std::size_t j) {
  while (w[j].parent != j) {
    w[j].parent = w[w[j].parent].parent;
    j = w[j].parent;
  }
  return j;
}

}  // namespace

SkeletonSample sample_skeleton(const SkeletonConfig& cfg, SkeletonOptions opts) {
  cfg.validate();
  const double h = cfg.step;
  const std::size_t k = cfg.starts.size();

  std::vector<Walker> w(k);
  SkeletonSample out;
  out.paths.reserve(k);
  std::vector<std::vector<Knot>> knots(k);
  std::int64_t first = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 0; j < k; ++j) {
    const auto& p = cfg.starts[j];
    w[j].key = walker_key(cfg.seed, p);
    auto n = static_cast<std::int64_t>(std::floor(p.t / h));
    while (static_cast<double>(n + 1) * h <= p.t) ++n;
    while (static_cast<double>(n) * h > p.t) --n;
    w[j].first_step = n;
    w[j].parent = j;
    first = std::min(first, n);
  }
  auto last = static_cast<std::int64_t>(std::ceil(cfg.horizon / h));
  while (static_cast<double>(last) * h < cfg.horizon) ++last;

  std::vector<std::size_t> reps;  // ascending cluster representatives
  std::vector<std::size_t> rep_before(k);
  std::size_t pending = k;

  for (std::int64_t n = first; n < last; ++n) {
    const double g0 = static_cast<double>(n) * h;
    const double g1 = static_cast<double>(n + 1) * h;

    bool activated = false;
    for (std::size_t j = 0; j < k; ++j) {
      if (!w[j].started && w[j].first_step == n) {
        w[j].started = true;
        w[j].x1 = cfg.starts[j].x;  // becomes x0 below
        knots[j].push_back({cfg.starts[j].t, cfg.starts[j].x});
        reps.push_back(j);
        --pending;
        activated = true;
      }
    }
    if (activated) std::sort(reps.begin(), reps.end());
    if (reps.empty()) continue;

    for (std::size_t j = 0; j < k; ++j) {
      if (w[j].started) rep_before[j] = find(w, j);
    }

    for (std::size_t r : reps) {
      Walker& wr = w[r];
      const bool fresh = wr.first_step == n;
      wr.s0 = fresh ? std::max(g0, cfg.starts[r].t) : g0;
      wr.x0 = wr.x1;
      const double z = rng::normal(rng::key(wr.key, rng::Stream::gaussian, n));
      wr.x1 = wr.x0 + std::sqrt(g1 - wr.s0) * z;
    }

    // Pairwise meetings, higher index joining lower, resolved in index order.
    std::vector<std::size_t> survivors;
    survivors.reserve(reps.size());
    for (std::size_t j : reps) {
      bool absorbed = false;
      for (std::size_t i : survivors) {
        const double s = std::max(w[i].s0, w[j].s0);
        const double d0 = w[j].at(s, g1) - w[i].at(s, g1);
        const double d1 = w[j].x1 - w[i].x1;
        bool meet = d0 == 0.0 || d1 == 0.0 || ((d0 < 0.0) != (d1 < 0.0));
        if (!meet) {
          const double expo = std::fabs(d0) * std::fabs(d1) / (g1 - s);
          if (expo < kBridgeCutoff) {
            const std::uint64_t lo = std::min(w[i].key, w[j].key);
            const std::uint64_t hi = std::max(w[i].key, w[j].key);
            const double u = rng::uniform(rng::key(cfg.seed, rng::Stream::bridge,
                                                   static_cast<std::int64_t>(lo),
                                                   static_cast<std::int64_t>(hi), n));
            meet = u < std::exp(-expo);
          }
        }
        if (meet) {
          const double when = d0 == 0.0 ? s : 0.5 * (s + g1);
          w[j].parent = i;
          out.records.push_back({i, j, when});
          absorbed = true;
          break;
        }
      }
      if (!absorbed) survivors.push_back(j);
    }
    reps.swap(survivors);

    for (std::size_t j = 0; j < k; ++j) {
      if (!w[j].started) continue;
      const std::size_t r = find(w, j);
      if (r != rep_before[j]) {
        // Joined another cluster this step: bend to the survivor at the
        // recorded meeting time.
        const CoalescenceRecord& rec = *std::find_if(
            out.records.rbegin(), out.records.rend(),
            [&](const CoalescenceRecord& c) { return c.absorbed == rep_before[j]; });
        if (rec.meet_time > knots[j].back().t) {
          knots[j].push_back({rec.meet_time, w[r].at(rec.meet_time, g1)});
        }
      }
      knots[j].push_back({g1, w[r].x1});
    }

    if (opts.stop_when_coalesced && pending == 0 && reps.size() == 1) break;
  }

  for (auto& kn : knots) out.paths.push_back(Path::polygonal(std::move(kn)));
  return out;
}

}  // namespace bweb
