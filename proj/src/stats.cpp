#include "bweb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bweb/arrivals.hpp"
#include "bweb/error.hpp"

namespace bweb {

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::two_sided:
      return "two_sided";
    case Comparison::at_most:
      return "at_most";
    case Comparison::at_least:
      return "at_least";
    case Comparison::none:
      break;
  }
  return "none";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::informational:
      return "informational";
    case Verdict::not_applicable:
      break;
  }
  return "not_applicable";
}

EstimateReport& EstimateReport::decide() {
  if (verdict == Verdict::not_applicable) return *this;
  if (!target || comparison == Comparison::none) {
    verdict = Verdict::informational;
    return *this;
  }
  bool ok = false;
  switch (comparison) {
    case Comparison::two_sided:
      ok = std::fabs(estimate - *target) <= tolerance;
      break;
    case Comparison::at_most:
      ok = estimate <= *target + tolerance;
      break;
    case Comparison::at_least:
      ok = estimate >= *target - tolerance;
      break;
    case Comparison::none:
      break;
  }
  verdict = ok ? Verdict::pass : Verdict::fail;
  return *this;
}

// ---------------------------------------------------------------------------
// aggregation

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

MeanSe mean_se(std::span<const double> v) {
  MeanSe out;
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  out.mean = pairwise_sum(v) / n;
  if (v.size() < 2) return out;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - out.mean) * (v[i] - out.mean);
  out.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return out;
}

MeanSe proportion(std::span<const char> flags) {
  MeanSe out;
  if (flags.empty()) return out;
  const auto hits = static_cast<double>(std::count_if(flags.begin(), flags.end(),
                                                      [](char f) { return f != 0; }));
  const double n = static_cast<double>(flags.size());
  out.mean = hits / n;
  out.se = std::sqrt(out.mean * (1.0 - out.mean) / n);
  return out;
}

// ---------------------------------------------------------------------------
// distribution tests

double normal_cdf(double x, double variance) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ConfigError("KS test on an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size();) {
    std::size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double f = cdf(sample[i]);
    d = std::max({d, std::fabs(static_cast<double>(i) / n - f),
                  std::fabs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return d;
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.18) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsTwoSample ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw ConfigError("KS test on an empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  KsTwoSample out;
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    out.d = std::max(out.d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double en = std::sqrt(n * m / (n + m));
  out.p_value = kolmogorov_q((en + 0.12 + 0.11 / en) * out.d);
  return out;
}

double dkw_epsilon(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw ConfigError("dkw_epsilon: bad arguments");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// fits

LineFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("ols needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("ols: all abscissae equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ssr += r * r;
    }
    f.slope_se = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return f;
}

LineFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                           std::span<const double> se) {
  if (x.size() != y.size() || x.empty()) throw ConfigError("fit needs one or more points");
  bool weighted = se.size() == x.size();
  for (double s : se) weighted = weighted && s > 0.0;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weighted ? 1.0 / (se[i] * se[i]) : 1.0;
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  if (!(sxx > 0.0)) throw ConfigError("fit through the origin needs a nonzero abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  if (weighted) {
    f.slope_se = std::sqrt(1.0 / sxx);
  } else if (x.size() > 1) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.slope * x[i];
      ssr += r * r;
    }
    f.slope_se = std::sqrt(ssr / static_cast<double>(x.size() - 1) / sxx);
  }
  return f;
}

// ---------------------------------------------------------------------------
// sources

Source reseeded(const Source& src, std::uint64_t seed) {
  return std::visit([seed](const auto& s) -> Source { return s.reseeded(seed); }, src);
}

std::vector<SpaceTimePoint> interval_starts(double a, double b, double t0, std::size_t k) {
  if (k == 0) throw ConfigError("interval_starts needs k >= 1");
  std::vector<SpaceTimePoint> out;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = k == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
    out.push_back({x, t0});
  }
  return out;
}

namespace {

SkeletonSample skeleton_until(SkeletonConfig cfg, double until) {
  cfg.horizon = std::max(cfg.horizon, until);
  return sample_skeleton(cfg, {.stop_when_coalesced = true});
}

bool is_crossing(const Source& src) {
  const auto* sys = std::get_if<CoalescingSystem>(&src);
  return sys && sys->kind == SystemKind::discrete_crossing;
}

}  // namespace

std::vector<CountResult> sample_counts(const Source& src, double t0, double a, double b,
                                       std::span<const double> lags, double match_tol) {
  std::vector<CountResult> out;
  if (const auto* sys = std::get_if<CoalescingSystem>(&src)) {
    const ArrivalSample s = lattice_arrivals(*sys, t0, a, b, lags);
    for (const auto& row : s.positions) out.push_back(count_arrivals(s.starts, row, match_tol));
    return out;
  }
  const auto& cfg = std::get<SkeletonConfig>(src);
  double until = t0;
  for (double l : lags) until = std::max(until, t0 + l);
  const SkeletonSample s = skeleton_until(cfg, until);
  for (double l : lags) out.push_back(count(s.paths, {t0, l, a, b, match_tol}));
  return out;
}

CountResult TouchSample::restrict(double a, double b, double match_tol) const {
  std::vector<double> s, e;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (starts[k] >= a && starts[k] <= b) {
      s.push_back(starts[k]);
      e.push_back(ends[k]);
    }
  }
  return count_arrivals(s, e, match_tol);
}

TouchSample sample_touches(const Source& src, double t0, double a, double b, double lag) {
  TouchSample out;
  if (const auto* sys = std::get_if<CoalescingSystem>(&src)) {
    const double lags[] = {lag};
    ArrivalSample s = lattice_arrivals(*sys, t0, a, b, lags);
    out.starts = std::move(s.starts);
    out.ends = std::move(s.positions[0]);
    return out;
  }
  const SkeletonSample s = skeleton_until(std::get<SkeletonConfig>(src), t0 + lag);
  for (const Path& p : s.paths) {
    if (p.start_time() > t0) continue;
    const double x = p(t0);
    if (x < a || x > b) continue;
    out.starts.push_back(x);
    out.ends.push_back(p(t0 + lag));
  }
  return out;
}

std::vector<SpaceTimePoint> default_anchors(const Source& src) {
  const auto* sys = std::get_if<CoalescingSystem>(&src);
  if (!sys) return {{0.0, 0.0}};
  if (sys->kind == SystemKind::discrete_parity) return {{0.0, 0.0}, {sys->delta, 0.0}};
  return {{0.0, 0.0}, {0.5 * sys->delta, 0.0}};
}

std::vector<SpaceTimePoint> ScanGrid::points() const {
  if (!(u > 0.0) || !(t > 0.0) || L < 0.0 || T < 0.0) throw ConfigError("bad scan grid");
  std::vector<SpaceTimePoint> out;
  const auto nx = static_cast<std::int64_t>(std::floor(2.0 * L / (u / 2.0) + 1e-9));
  const auto nt = static_cast<std::int64_t>(std::floor(2.0 * T / t + 1e-9));
  for (std::int64_t j = 0; j <= nt; ++j) {
    for (std::int64_t i = 0; i <= nx; ++i) {
      out.push_back({-L + static_cast<double>(i) * u / 2.0, -T + static_cast<double>(j) * t});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// eta estimators

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

EstimateReport base_report(const std::string& name, std::size_t replicas, std::uint64_t seed) {
  EstimateReport r;
  r.name = name;
  r.replicas = replicas;
  r.seed = seed;
  return r;
}

std::vector<double> eta_samples(const Source& src, const CountingQuery& q, std::size_t replicas,
                                std::uint64_t seed, const RunOptions& opts) {
  const double lags[] = {q.t};
  return run_replicas<double>(replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
    return static_cast<double>(sample_counts(reseeded(src, s), q.t0, q.a, q.b, lags,
                                             q.match_tol)[0].eta);
  });
}

std::vector<char> at_least(std::span<const double> v, double k) {
  std::vector<char> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] >= k;
  return out;
}

}  // namespace

EstimateReport est_eta_mean(const Source& src, const CountingQuery& q, std::size_t replicas,
                            std::uint64_t seed, const RunOptions& opts, double rel_tol,
                            std::optional<double> target) {
  q.validate();
  if (replicas < 100) throw ConfigError("est_eta_mean needs at least 100 replicas");
  const auto eta = eta_samples(src, q, replicas, seed, opts);
  const MeanSe m = mean_se(eta);
  EstimateReport r = base_report("est_eta_mean", replicas, seed);
  r.estimate = m.mean;
  r.std_error = m.se;
  r.target = target.value_or(1.0 + (q.b - q.a) / std::sqrt(std::numbers::pi * q.t));
  r.tolerance = std::max(3.0 * m.se, rel_tol * std::fabs(*r.target));
  r.comparison = Comparison::two_sided;
  return r.decide();
}

EstimateReport est_eta_tail(const Source& src, const CountingQuery& q, int k,
                            std::size_t replicas, std::uint64_t seed, const RunOptions& opts,
                            bool equality) {
  q.validate();
  if (k < 1) throw ConfigError("est_eta_tail needs k >= 1");
  const auto eta = eta_samples(src, q, replicas, seed, opts);
  const auto flags = at_least(eta, static_cast<double>(k) + 1.0);  // eta-hat >= k
  const MeanSe p = proportion(flags);
  EstimateReport r = base_report("est_eta_tail", replicas, seed);
  r.series = "k=" + std::to_string(k);
  r.x = k;
  r.estimate = p.mean;
  r.std_error = p.se;
  r.target = std::pow(theta(q.b - q.a, q.t), k);
  r.tolerance = 3.0 * p.se;
  r.comparison = equality ? Comparison::two_sided : Comparison::at_most;
  return r.decide();
}

EstimateReport check_rw_bound(const CoalescingSystem& system, const CountingQuery& q, int k,
                              std::size_t replicas, std::uint64_t seed, const RunOptions& opts) {
  q.validate();
  if (k < 1) throw ConfigError("check_rw_bound needs k >= 1");
  const auto eta = eta_samples(system, q, replicas, seed, opts);
  const MeanSe left = proportion(at_least(eta, k));
  const MeanSe two = proportion(at_least(eta, 2));
  const double right = k == 1 ? 1.0 : std::pow(two.mean, k - 1);
  const double right_se = k <= 1 ? 0.0 : (k - 1) * std::pow(two.mean, k - 2) * two.se;
  EstimateReport r = base_report("check_rw_bound", replicas, seed);
  r.series = "k=" + std::to_string(k);
  r.x = k;
  r.estimate = left.mean;
  r.std_error = std::sqrt(left.se * left.se + right_se * right_se);
  r.target = right;
  r.tolerance = 3.0 * r.std_error;
  r.comparison = Comparison::at_most;
  return r.decide();
}

// ---------------------------------------------------------------------------
// Donsker checks

namespace {

double lattice_steps(double t, double delta) {
  const double n = t / (delta * delta);
  const double r = std::round(n);
  return std::fabs(n - r) <= 1e-9 * std::max(1.0, n) ? r : n;
}

// Rescaled positions of one walker from the origin at each time.
std::vector<double> marginal_positions(const CoalescingSystem& sys, std::span<const double> times) {
  const double d = sys.delta;
  std::vector<double> out(times.size());
  if (times.empty()) return out;
  double end = 0.0;
  for (double t : times) end = std::max(end, lattice_steps(t, d));
  if (sys.kind == SystemKind::continuous_time) {
    const ContinuousStart st[] = {{0, 0.0}};
    const auto paths = continuous_paths(sys, sys.clocks(), st, end);
    const Path& p = paths.back();  // the waiting version if the origin is an event
    for (std::size_t k = 0; k < times.size(); ++k) out[k] = d * p(lattice_steps(times[k], d));
    return out;
  }
  const IncrementField field = sys.increments();
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return times[x] < times[y];
  });
  std::int64_t i = 0;
  std::int64_t j = 0;
  for (std::size_t k : order) {
    const double tau = lattice_steps(times[k], d);
    while (static_cast<double>(j + 1) <= tau) i += field(i, j++);
    const double frac = tau - static_cast<double>(j);
    out[k] = d * (static_cast<double>(i) + (frac > 0.0 ? frac * field(i, j) : 0.0));
  }
  return out;
}

// Rescaled first meeting time of walkers at 0 and gap / delta, or +inf when
// they stay apart up to `until`.
double meeting_time(const CoalescingSystem& sys, double gap, double until) {
  const double d = sys.delta;
  const double m = gap / d;
  const auto site = static_cast<std::int64_t>(std::llround(m));
  if (std::fabs(m - static_cast<double>(site)) > 1e-9 * std::max(1.0, m) || site <= 0) {
    throw ConfigError("pair gap must be a positive multiple of delta");
  }
  const double end = lattice_steps(until, d);
  if (sys.kind == SystemKind::continuous_time) {
    const ContinuousStart st[] = {{0, 0.0}, {site, 0.0}};
    const auto paths = continuous_paths(sys, sys.clocks(), st, end);
    const auto k0 = paths.front().knots();
    const auto k1 = paths.back().knots();
    // Coalesced paths share every knot from the meeting on.
    std::size_t a = 0, b = 0;
    while (a < k0.size() && b < k1.size()) {
      if (k0[a] == k1[b]) return k0[a].t <= end ? d * d * k0[a].t : kInf;
      if (k0[a].t < k1[b].t) {
        ++a;
      } else {
        ++b;
      }
    }
    return kInf;
  }
  if (sys.kind == SystemKind::discrete_parity && site % 2 != 0) {
    throw ConfigError("pair gap must be an even number of lattice sites");
  }
  const IncrementField field = sys.increments();
  std::int64_t x = 0, y = site;
  for (std::int64_t j = 0; static_cast<double>(j) < end; ++j) {
    x += field(x, j);
    y += field(y, j);
    if (x == y) return d * d * static_cast<double>(j + 1);
  }
  return kInf;
}

}  // namespace

std::vector<EstimateReport> check_donsker(const CoalescingSystem& system,
                                          std::span<const double> times, std::size_t replicas,
                                          std::uint64_t seed, const RunOptions& opts,
                                          const DonskerOptions& dopts) {
  system.validate();
  if (replicas < 2) throw ConfigError("check_donsker needs replicas >= 2");
  for (double t : times) {
    if (!(t > 0.0)) throw ConfigError("check_donsker times must be positive");
  }
  for (std::size_t k = 0; k < dopts.meeting_grid.size(); ++k) {
    if (!(dopts.meeting_grid[k] > 0.0) ||
        (k > 0 && !(dopts.meeting_grid[k] > dopts.meeting_grid[k - 1]))) {
      throw ConfigError("meeting grid must be positive and increasing");
    }
  }
  const double d = system.delta;
  const bool continuous = system.kind == SystemKind::continuous_time;
  const Rational var_law = continuous ? Rational(1) : system.law.variance();
  const double sigma2 = var_law.to_double();
  const double until = dopts.meeting_grid.empty() ? 0.0 : dopts.meeting_grid.back();

  struct One {
    std::vector<double> pos;
    double meet = kInf;
  };
  const auto runs = run_replicas<One>(replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
    const CoalescingSystem sys = system.reseeded(s);
    One o;
    o.pos = marginal_positions(sys, times);
    if (until > 0.0) {
      o.meet = meeting_time(system.reseeded(rng::derive_seed(s, 0, 1)), dopts.pair_gap, until);
    }
    return o;
  });

  std::vector<EstimateReport> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    std::vector<double> xs(replicas);
    for (std::size_t r = 0; r < replicas; ++r) xs[r] = runs[r].pos[k];

    EstimateReport ks = base_report("check_donsker", replicas, seed);
    ks.series = "marginal_ks";
    ks.x = t;
    ks.estimate = ks_one_sample(xs, [&](double v) { return normal_cdf(v, sigma2 * t); });
    ks.target = dopts.marginal_threshold.value_or(dkw_epsilon(replicas, dopts.alpha) +
                                                  2.0 * d / std::sqrt(t));
    ks.comparison = Comparison::at_most;
    out.push_back(ks.decide());

    // Exact: var(law) * (t / delta^2) steps * delta^2, in rational arithmetic
    // when t / delta^2 is a whole number of steps.
    EstimateReport ex = base_report("check_donsker", replicas, seed);
    ex.series = "marginal_variance_exact";
    ex.x = t;
    ex.comparison = Comparison::two_sided;
    const double steps = lattice_steps(t, d);
    if (!continuous && steps == std::floor(steps)) {
      try {
        const Rational dr = Rational::from_double(d);
        const Rational exact = var_law * Rational(static_cast<std::int64_t>(steps)) * dr * dr;
        const Rational want = var_law * Rational::from_double(t);
        ex.estimate = exact.to_double();
        ex.target = want.to_double();
        ex.verdict = exact == want ? Verdict::pass : Verdict::fail;
        out.push_back(ex);
      } catch (const ConfigError&) {
        ex.estimate = sigma2 * steps * d * d;
        ex.target = sigma2 * t;
        ex.tolerance = 1e-12 * sigma2 * t;
        out.push_back(ex.decide());
      }
    } else {
      ex.estimate = sigma2 * steps * d * d;
      ex.target = sigma2 * t;
      ex.tolerance = 1e-12 * sigma2 * t;
      out.push_back(ex.decide());
    }

    EstimateReport sv = base_report("check_donsker", replicas, seed);
    sv.series = "marginal_variance";
    sv.x = t;
    const MeanSe m = mean_se(xs);
    std::vector<double> sq(replicas);
    for (std::size_t r = 0; r < replicas; ++r) sq[r] = (xs[r] - m.mean) * (xs[r] - m.mean);
    const double n = static_cast<double>(replicas);
    sv.estimate = pairwise_sum(sq) / (n - 1.0);
    sv.std_error = sv.estimate * std::sqrt(2.0 / (n - 1.0));
    sv.target = sigma2 * t;
    sv.tolerance = 3.0 * sv.std_error;
    sv.comparison = Comparison::two_sided;
    out.push_back(sv.decide());
  }

  if (!dopts.meeting_grid.empty()) {
    EstimateReport mt = base_report("check_donsker", replicas, seed);
    mt.series = "meeting_cdf";
    mt.x = dopts.pair_gap;
    const auto ref = pair_meeting_cdf(dopts.pair_gap, dopts.meeting_grid);
    double sup = 0.0;
    for (std::size_t g = 0; g < ref.size(); ++g) {
      const double t = dopts.meeting_grid[g];
      const auto hits = std::count_if(runs.begin(), runs.end(),
                                      [t](const One& o) { return o.meet <= t; });
      sup = std::max(sup, std::fabs(static_cast<double>(hits) / static_cast<double>(replicas) -
                                    ref[g]));
    }
    mt.estimate = sup;
    mt.target = dopts.meeting_threshold.value_or(
        dkw_epsilon(replicas, dopts.alpha) + 2.0 * d / std::sqrt(dopts.meeting_grid.front()));
    mt.comparison = Comparison::at_most;
    out.push_back(mt.decide());
  }
  return out;
}

// ---------------------------------------------------------------------------
// (B1), (B2), (B1'), (B2')

namespace {

std::vector<double> checked_eps(std::span<const double> eps) {
  if (eps.empty()) throw ConfigError("eps grid is empty");
  std::vector<double> e(eps.begin(), eps.end());
  for (double v : e) {
    if (!(v >= 0.0)) throw ConfigError("eps values must be >= 0");
  }
  std::sort(e.begin(), e.end());
  if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
    throw ConfigError("eps grid has repeated values");
  }
  return e;
}

// A skeleton source used for interval curves gets its starts at the given
// offsets from the anchor, in the given order.
Source anchored(const Source& src, const SpaceTimePoint& anchor, std::span<const double> offs) {
  if (const auto* cfg = std::get_if<SkeletonConfig>(&src)) {
    SkeletonConfig c = *cfg;
    c.starts.clear();
    for (double o : offs) c.starts.push_back({anchor.x + o, anchor.t});
    return c;
  }
  return src;
}

// flags[r][anchor][e] for an event on nested intervals around each anchor.
using NestedFlags = std::vector<std::vector<std::vector<char>>>;

template <class Event>
NestedFlags nested_flags(const Source& src, double t, std::span<const double> eps, double lo_mul,
                         std::span<const double> offsets,
                         const std::vector<SpaceTimePoint>& anchors, double t0,
                         std::size_t replicas, std::uint64_t seed, const RunOptions& opts,
                         Event event) {
  const double emax = eps.back();
  return run_replicas<std::vector<std::vector<char>>>(
      replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
        std::vector<std::vector<char>> per(anchors.size(), std::vector<char>(eps.size()));
        for (std::size_t a = 0; a < anchors.size(); ++a) {
          const SpaceTimePoint& an = anchors[a];
          const Source one = reseeded(anchored(src, an, offsets), rng::derive_seed(s, a, 2));
          const TouchSample ts =
              sample_touches(one, t0 + an.t, an.x + lo_mul * emax, an.x + emax, t);
          for (std::size_t e = 0; e < eps.size(); ++e) {
            per[a][e] = event(ts.restrict(an.x + lo_mul * eps[e], an.x + eps[e]));
          }
        }
        return per;
      });
}

struct SupPoint {
  MeanSe p;
  std::size_t anchor = 0;
};

// sup over anchors of the event frequency at eps index e.
SupPoint sup_over_anchors(const NestedFlags& flags, std::size_t n_anchors, std::size_t e) {
  SupPoint best;
  for (std::size_t a = 0; a < n_anchors; ++a) {
    std::vector<char> f(flags.size());
    for (std::size_t r = 0; r < flags.size(); ++r) f[r] = flags[r][a][e];
    const MeanSe p = proportion(f);
    if (a == 0 || p.mean > best.p.mean) best = {p, a};
  }
  return best;
}

// Count of adjacent pairs where the curve drops by more than 3 combined SE as
// the abscissa grows.
std::size_t trend_violations(std::span<const double> v, std::span<const double> se) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] > v[i + 1] + 3.0 * std::hypot(se[i], se[i + 1])) ++bad;
  }
  return bad;
}

// Skeleton starts for interval curves: the anchor, every interval end, and a
// grid of pitch (smallest eps) / 4 so that short intervals hold more than
// their two ends.
std::vector<double> skeleton_offsets(std::span<const double> eps, bool symmetric) {
  std::vector<double> offs{0.0};
  double emin = kInf;
  for (double e : eps) {
    if (e == 0.0) continue;
    emin = std::min(emin, e);
    if (symmetric) offs.push_back(-e);
    offs.push_back(e);
  }
  if (!std::isfinite(emin)) return offs;
  const double pitch = emin / 4.0;
  const auto n = static_cast<std::int64_t>(std::floor(eps.back() / pitch + 1e-9));
  for (std::int64_t k = 1; k <= n; ++k) {
    const double o = pitch * static_cast<double>(k);
    if (std::find(offs.begin(), offs.end(), o) != offs.end()) continue;
    if (symmetric) offs.push_back(-o);
    offs.push_back(o);
  }
  return offs;
}

}  // namespace

std::vector<EstimateReport> est_B1(const Source& src, double t, std::span<const double> eps_in,
                                   std::size_t replicas, std::uint64_t seed,
                                   const RunOptions& opts, const CurveOptions& c) {
  if (!(t > 0.0)) throw ConfigError("est_B1 needs t > 0");
  const auto eps = checked_eps(eps_in);
  const auto anchors = c.anchors.empty() ? default_anchors(src) : c.anchors;
  const auto offs = skeleton_offsets(eps, false);
  const auto flags = nested_flags(src, t, eps, 0.0, offs, anchors, c.t0, replicas, seed, opts,
                                  [](const CountResult& r) -> char { return r.eta_hat() >= 1; });

  std::vector<EstimateReport> out;
  std::vector<double> xs, ys, ses;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const SupPoint sp = sup_over_anchors(flags, anchors.size(), e);
    EstimateReport r = base_report("est_B1", replicas, seed);
    r.series = "B1";
    r.x = eps[e];
    r.estimate = sp.p.mean;
    r.std_error = sp.p.se;
    r.target = theta(eps[e], t);
    out.push_back(r.decide());
    if (eps[e] > 0.0) {
      xs.push_back(eps[e]);
      ys.push_back(sp.p.mean);
      ses.push_back(sp.p.se);
    }
  }
  EstimateReport slope = base_report("est_B1", replicas, seed);
  slope.series = "B1_slope";
  if (!xs.empty()) {
    const LineFit f = fit_through_origin(xs, ys, ses);
    slope.estimate = f.slope;
    slope.std_error = f.slope_se;
    slope.target = 1.0 / std::sqrt(std::numbers::pi * t);
    slope.tolerance = c.slope_rel_tol * *slope.target;
    slope.comparison = Comparison::two_sided;
  }
  out.push_back(slope.decide());
  return out;
}

std::vector<EstimateReport> est_B2(const Source& src, double t, std::span<const double> eps_in,
                                   std::size_t replicas, std::uint64_t seed,
                                   const RunOptions& opts, const CurveOptions& c) {
  if (!(t > 0.0)) throw ConfigError("est_B2 needs t > 0");
  const auto eps = checked_eps(eps_in);
  const auto anchors = c.anchors.empty() ? default_anchors(src) : c.anchors;
  const auto offs = skeleton_offsets(eps, false);
  const auto flags = nested_flags(src, t, eps, 0.0, offs, anchors, c.t0, replicas, seed, opts,
                                  [](const CountResult& r) -> char { return r.eta_hat() >= 2; });

  std::vector<EstimateReport> out;
  std::vector<double> vs, ses;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    EstimateReport r = base_report("est_B2", replicas, seed);
    r.series = "B2";
    r.x = eps[e];
    if (eps[e] > 0.0) {
      const SupPoint sp = sup_over_anchors(flags, anchors.size(), e);
      r.estimate = sp.p.mean / eps[e];
      r.std_error = sp.p.se / eps[e];
      vs.push_back(r.estimate);
      ses.push_back(r.std_error);
    }
    out.push_back(r.decide());
  }
  EstimateReport trend = base_report("est_B2", replicas, seed);
  trend.series = "B2_trend";
  trend.estimate = static_cast<double>(trend_violations(vs, ses));
  trend.target = 0.0;
  trend.comparison = Comparison::at_most;
  out.push_back(trend.decide());

  EstimateReport small = base_report("est_B2", replicas, seed);
  small.series = "B2_smallest";
  if (!vs.empty()) {
    const auto first = std::find_if(eps.begin(), eps.end(), [](double v) { return v > 0.0; });
    small.x = *first;
    small.estimate = vs.front();
    small.std_error = ses.front();
    small.target = c.threshold;
    small.comparison = Comparison::at_most;
  }
  out.push_back(small.decide());
  return out;
}

std::vector<EstimateReport> est_B1p_B2p(const Source& src, double t,
                                        std::span<const double> eps_in, std::size_t replicas,
                                        std::uint64_t seed, const RunOptions& opts,
                                        const CurveOptions& c) {
  if (!(t > 0.0)) throw ConfigError("est_B1p_B2p needs t > 0");
  const auto eps = checked_eps(eps_in);
  const auto anchors = c.anchors.empty() ? default_anchors(src) : c.anchors;
  const auto offs = skeleton_offsets(eps, true);
  // Two events per interval, packed as bits.
  const auto flags = nested_flags(src, t, eps, -1.0, offs, anchors, c.t0, replicas, seed, opts,
                                  [](const CountResult& r) -> char {
                                    std::vector<double> u = r.n_plus;
                                    u.insert(u.end(), r.n_minus.begin(), r.n_minus.end());
                                    std::sort(u.begin(), u.end());
                                    u.erase(std::unique(u.begin(), u.end()), u.end());
                                    return static_cast<char>((r.eta > 1 ? 1 : 0) |
                                                             (u != r.n ? 2 : 0));
                                  });
  auto bit = [&](char mask) {
    NestedFlags f = flags;
    for (auto& per : f) {
      for (auto& row : per) {
        for (char& v : row) v = (v & mask) != 0;
      }
    }
    return f;
  };
  const NestedFlags one = bit(1), two = bit(2);

  std::vector<EstimateReport> out;
  std::vector<double> vs, ses;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const SupPoint a = sup_over_anchors(one, anchors.size(), e);
    EstimateReport r1 = base_report("est_B1p_B2p", replicas, seed);
    r1.series = "B1p";
    r1.x = eps[e];
    r1.estimate = a.p.mean;
    r1.std_error = a.p.se;
    out.push_back(r1.decide());
  }
  for (std::size_t e = 0; e < eps.size(); ++e) {
    EstimateReport r2 = base_report("est_B1p_B2p", replicas, seed);
    r2.series = "B2p";
    r2.x = eps[e];
    if (eps[e] > 0.0) {
      const SupPoint b = sup_over_anchors(two, anchors.size(), e);
      r2.estimate = b.p.mean / eps[e];
      r2.std_error = b.p.se / eps[e];
      vs.push_back(r2.estimate);
      ses.push_back(r2.std_error);
    }
    out.push_back(r2.decide());
  }
  EstimateReport trend = base_report("est_B1p_B2p", replicas, seed);
  trend.series = "B2p_trend";
  trend.estimate = static_cast<double>(trend_violations(vs, ses));
  trend.target = 0.0;
  trend.comparison = Comparison::at_most;
  out.push_back(trend.decide());
  return out;
}

// ---------------------------------------------------------------------------
// (T1)

namespace {

// A_{t,u}(x0, t0) on a discrete lattice: every path touching the small
// rectangle runs through one of its lattice points, so it is enough to start
// walkers there and watch for the sides of the big rectangle.
bool lattice_rect_event(const CoalescingSystem& sys, const IncrementField& field, double x0,
                        double t0, double u, double t) {
  const double d = sys.delta;
  const double cx = x0 / d;
  const double half_small = u / (4.0 * d);
  const double half_big = u / (2.0 * d);
  const double s0 = t0 / (d * d);
  const double s1 = (t0 + t) / (d * d);
  const double s2 = (t0 + 2.0 * t) / (d * d);
  const bool parity = sys.kind == SystemKind::discrete_parity;
  const auto site_lo = static_cast<std::int64_t>(std::ceil(cx - half_small - 1e-9));
  const auto site_hi = static_cast<std::int64_t>(std::floor(cx + half_small + 1e-9));

  std::vector<std::int64_t> pos;
  for (auto j = static_cast<std::int64_t>(std::ceil(s0 - 1e-9));
       static_cast<double>(j) <= s2 + 1e-9; ++j) {
    if (static_cast<double>(j) <= s1 + 1e-9) {
      for (std::int64_t i = site_lo; i <= site_hi; ++i) {
        if (parity && ((i + j) % 2 != 0)) continue;
        pos.push_back(i);
      }
      std::sort(pos.begin(), pos.end());
      pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    }
    const double rest = s2 - static_cast<double>(j);
    if (rest <= 1e-9) break;
    const double g = std::min(1.0, rest);
    for (std::int64_t& i : pos) {
      const int step = field(i, j);
      if (std::fabs(static_cast<double>(i) + g * step - cx) >= half_big) return true;
      i += step;
    }
    if (!sys.window.contains_x(static_cast<double>(pos.empty() ? 0 : pos.front())) ||
        !sys.window.contains_x(static_cast<double>(pos.empty() ? 0 : pos.back()))) {
      throw WindowOverflow("walker left the spatial window");
    }
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  }
  return false;
}

// Continuous-time version on explicit paths: walkers from the band sites at
// t0 and the jump paths leaving band sites (and their neighbours) inside
// [t0, t0 + t].
bool clock_rect_event(const CoalescingSystem& sys, double x0, double t0, double u, double t) {
  const double d = sys.delta;
  const double cx = x0 / d;
  const double s0 = t0 / (d * d);
  const double s1 = (t0 + t) / (d * d);
  const double s2 = (t0 + 2.0 * t) / (d * d);
  const auto lo = static_cast<std::int64_t>(std::ceil(cx - u / (4.0 * d)));
  const auto hi = static_cast<std::int64_t>(std::floor(cx + u / (4.0 * d)));
  const ClockField clocks = sys.clocks();
  std::vector<ContinuousStart> starts;
  for (std::int64_t i = lo; i <= hi; ++i) starts.push_back({i, s0});
  for (std::int64_t i = lo - 1; i <= hi + 1; ++i) {
    for (const ClockEvent& e : clocks.events(i, s0, s1)) starts.push_back({i, e.time});
  }
  const auto paths = continuous_paths(sys, clocks, starts, s2);
  const RectEventQuery q{x0, t0, u, t};
  for (const Path& p : paths) {
    if (detect_A(rescale(p, d), q)) return true;
  }
  return false;
}

}  // namespace

std::vector<EstimateReport> est_T1(const Source& src, std::span<const double> u_grid,
                                   std::span<const double> t_grid, std::size_t replicas,
                                   std::uint64_t seed, const RunOptions& opts,
                                   std::optional<ScanGrid> scan) {
  if (u_grid.empty() || t_grid.empty()) throw ConfigError("est_T1 needs u and t grids");
  std::vector<double> us(u_grid.begin(), u_grid.end()), ts(t_grid.begin(), t_grid.end());
  for (double v : us) {
    if (!(v > 0.0)) throw ConfigError("est_T1: u values must be positive");
  }
  for (double v : ts) {
    if (!(v > 0.0)) throw ConfigError("est_T1: t values must be positive");
  }
  std::sort(ts.begin(), ts.end());

  std::vector<SpaceTimePoint> anchors;
  if (scan) {
    anchors = scan->points();
  } else if (const auto* sys = std::get_if<CoalescingSystem>(&src)) {
    const double pitch = sys->kind == SystemKind::discrete_parity ? 2.0 * sys->delta : sys->delta;
    for (int k = 0; k < 4; ++k) anchors.push_back({pitch * k / 4.0, 0.0});
  } else {
    anchors = {{0.0, 0.0}};
  }

  const std::size_t nu = us.size(), nt = ts.size(), na = anchors.size();
  // flags[r][(iu * nt + it) * na + a]
  const auto flags = run_replicas<std::vector<char>>(
      replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
        std::vector<char> f(nu * nt * na);
        const Source one = reseeded(src, s);
        if (const auto* sys = std::get_if<CoalescingSystem>(&one)) {
          const IncrementField field = sys->increments();
          for (std::size_t iu = 0; iu < nu; ++iu) {
            for (std::size_t it = 0; it < nt; ++it) {
              for (std::size_t a = 0; a < na; ++a) {
                const auto& an = anchors[a];
                f[(iu * nt + it) * na + a] =
                    sys->kind == SystemKind::continuous_time
                        ? clock_rect_event(*sys, an.x, an.t, us[iu], ts[it])
                        : lattice_rect_event(*sys, field, an.x, an.t, us[iu], ts[it]);
              }
            }
          }
          return f;
        }
        double until = 0.0;
        for (const auto& an : anchors) until = std::max(until, an.t + 2.0 * ts.back());
        SkeletonConfig cfg = std::get<SkeletonConfig>(one);
        cfg.horizon = std::max(cfg.horizon, until);
        const SkeletonSample sk = sample_skeleton(cfg);
        for (std::size_t iu = 0; iu < nu; ++iu) {
          for (std::size_t it = 0; it < nt; ++it) {
            for (std::size_t a = 0; a < na; ++a) {
              const RectEventQuery q{anchors[a].x, anchors[a].t, us[iu], ts[it]};
              f[(iu * nt + it) * na + a] = detect_A(sk.paths, q);
            }
          }
        }
        return f;
      });

  std::vector<EstimateReport> out;
  for (std::size_t iu = 0; iu < nu; ++iu) {
    std::vector<double> vs, ses;
    for (std::size_t it = 0; it < nt; ++it) {
      MeanSe best;
      for (std::size_t a = 0; a < na; ++a) {
        std::vector<char> f(replicas);
        for (std::size_t r = 0; r < replicas; ++r) f[r] = flags[r][(iu * nt + it) * na + a];
        const MeanSe p = proportion(f);
        if (a == 0 || p.mean > best.mean) best = p;
      }
      EstimateReport r = base_report("est_T1", replicas, seed);
      r.series = "T1 u=" + fmt(us[iu]);
      r.x = ts[it];
      r.estimate = best.mean / ts[it];
      r.std_error = best.se / ts[it];
      vs.push_back(r.estimate);
      ses.push_back(r.std_error);
      out.push_back(r.decide());
    }
    EstimateReport trend = base_report("est_T1", replicas, seed);
    trend.series = "T1_trend u=" + fmt(us[iu]);
    trend.x = us[iu];
    trend.estimate = static_cast<double>(trend_violations(vs, ses));
    trend.target = 0.0;
    trend.comparison = Comparison::at_most;
    out.push_back(trend.decide());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hoelder exponent

double oscillation(const Path& p, double r, double lag) {
  return max_deviation(p, r, r + lag, p(r));
}

EstimateReport holder_from_paths(std::span<const Path> paths, std::span<const double> lags_in,
                                 const HolderOptions& h) {
  std::vector<double> lags(lags_in.begin(), lags_in.end());
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  if (lags.size() < 2 || !(lags.front() > 0.0)) {
    throw ConfigError("Hoelder fit needs two or more distinct positive lags");
  }
  if (paths.empty() || h.windows == 0) throw ConfigError("Hoelder fit needs paths and windows");

  std::vector<double> lx, ly;
  for (double lag : lags) {
    std::vector<double> osc;
    for (const Path& p : paths) {
      const double lo = std::isfinite(p.start_time()) ? p.start_time() : 0.0;
      const double span = h.horizon - lo - lags.back();
      if (!(span >= 0.0)) throw ConfigError("largest lag exceeds the path horizon");
      for (std::size_t w = 0; w < h.windows; ++w) {
        const double r =
            h.windows == 1 ? lo : lo + span * static_cast<double>(w) / (h.windows - 1);
        osc.push_back(oscillation(p, r, lag));
      }
    }
    auto mid = osc.begin() + static_cast<std::ptrdiff_t>(osc.size() / 2);
    std::nth_element(osc.begin(), mid, osc.end());
    if (!(*mid > 0.0)) throw ConfigError("degenerate oscillation: median is zero");
    lx.push_back(std::log(lag));
    ly.push_back(std::log(*mid));
  }
  const LineFit f = ols(lx, ly);
  EstimateReport r;
  r.name = "est_holder";
  r.replicas = paths.size();
  r.estimate = f.slope;
  r.std_error = f.slope_se;
  r.target = 0.5 * (h.lo + h.hi);
  r.tolerance = 0.5 * (h.hi - h.lo);
  r.comparison = Comparison::two_sided;
  return r.decide();
}

EstimateReport est_holder(const Source& src, std::span<const double> lags, std::size_t replicas,
                          std::uint64_t seed, const RunOptions& opts, const HolderOptions& h) {
  if (replicas == 0) throw ConfigError("est_holder needs replicas >= 1");
  const auto paths = run_replicas<Path>(replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
    const Source one = reseeded(src, s);
    if (const auto* sys = std::get_if<CoalescingSystem>(&one)) {
      const double d = sys->delta;
      const double end = std::ceil(lattice_steps(h.horizon, d));
      if (sys->kind == SystemKind::continuous_time) {
        const ContinuousStart st[] = {{0, 0.0}};
        return rescale(continuous_paths(*sys, sys->clocks(), st, end).back(), d);
      }
      const LatticePoint st[] = {{0, 0}};
      return rescale(discrete_paths(*sys, sys->increments(), st,
                                    static_cast<std::int64_t>(end))[0],
                     d);
    }
    SkeletonConfig cfg = std::get<SkeletonConfig>(one);
    cfg.horizon = std::max(cfg.horizon, h.horizon);
    return sample_skeleton(cfg).paths.front();
  });
  EstimateReport r = holder_from_paths(paths, lags, h);
  r.seed = seed;
  r.replicas = replicas;
  return r;
}

// ---------------------------------------------------------------------------
// order invariance and monotonicity

std::vector<EstimateReport> check_order_invariance(const SkeletonConfig& cfg,
                                                   std::span<const std::size_t> permutation,
                                                   const CountingQuery& q, std::size_t replicas,
                                                   std::uint64_t seed, const RunOptions& opts,
                                                   bool shared_seed, double alpha) {
  q.validate();
  const std::size_t k = cfg.starts.size();
  std::vector<char> seen(k, 0);
  if (permutation.size() != k) throw ConfigError("permutation length differs from the start list");
  for (std::size_t p : permutation) {
    if (p >= k || seen[p]) throw ConfigError("permutation is not a bijection of indices");
    seen[p] = 1;
  }
  SkeletonConfig permuted = cfg;
  for (std::size_t i = 0; i < k; ++i) permuted.starts[i] = cfg.starts[permutation[i]];

  const auto x = eta_samples(cfg, q, replicas, seed, opts);
  const std::uint64_t seed_b = shared_seed ? seed : rng::derive_seed(seed, 0, 3);
  const auto y = eta_samples(permuted, q, replicas, seed_b, opts);
  const KsTwoSample ks = ks_two_sample(x, y);

  EstimateReport p = base_report("check_order_invariance", replicas, seed);
  p.series = "ks_p_value";
  p.estimate = ks.p_value;
  p.target = alpha;
  p.comparison = Comparison::at_least;
  EstimateReport d = base_report("check_order_invariance", replicas, seed);
  d.series = "ks_distance";
  d.estimate = ks.d;
  return {p.decide(), d.decide()};
}

EstimateReport check_monotonicity(const Source& src, const CountingQuery& q,
                                  std::span<const double> t_grid, std::size_t replicas,
                                  std::uint64_t seed, const RunOptions& opts) {
  EstimateReport r = base_report("check_monotonicity", replicas, seed);
  if (is_crossing(src)) {
    r.verdict = Verdict::not_applicable;
    return r;
  }
  if (t_grid.empty()) throw ConfigError("check_monotonicity needs a t grid");
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    if (!(t > 0.0)) throw ConfigError("check_monotonicity t values must be positive");
  }
  const auto bad = run_replicas<double>(replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
    const auto c = sample_counts(reseeded(src, s), q.t0, q.a, q.b, ts, q.match_tol);
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
      if (c[k + 1].eta > c[k].eta) return 1.0;
    }
    return 0.0;
  });
  r.estimate = pairwise_sum(bad);
  r.target = 0.0;
  r.comparison = Comparison::at_most;
  return r.decide();
}

// ---------------------------------------------------------------------------
// oracles and property suites

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;

  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

}  // namespace

double theta_quadrature(double d, double t) {
  if (!(d >= 0.0) || !(t > 0.0)) throw ConfigError("theta_quadrature needs d >= 0, t > 0");
  if (d == 0.0) return 0.0;
  // The gap is d + sqrt(2) B; by reflection, survival mass on (0, inf) is the
  // free density at y minus its image at -y.
  static const GaussLegendre gl(20);
  const double var = 2.0 * t;
  const double sd = std::sqrt(var);
  auto density = [&](double y) {
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
    return c * (std::exp(-(y - d) * (y - d) / (2.0 * var)) -
                std::exp(-(y + d) * (y + d) / (2.0 * var)));
  };
  const double upper = d + 40.0 * sd;
  const int panels = 400;
  const double hw = upper / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * hw;
    double part = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) part += gl.w[i] * density(mid + 0.5 * hw * gl.x[i]);
    total += 0.5 * hw * part;
  }
  return total;
}

MeanSe theta_monte_carlo(double d, double t, std::size_t replicas, std::uint64_t seed,
                         const RunOptions& opts, std::size_t steps) {
  if (!(d > 0.0) || !(t > 0.0) || steps == 0 || replicas < 2) {
    throw ConfigError("theta_monte_carlo needs d, t > 0, steps >= 1, replicas >= 2");
  }
  const double h = t / static_cast<double>(steps);
  const double sd = std::sqrt(2.0 * h);
  const auto surv = run_replicas<double>(replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
    double g = d;
    double p = 1.0;
    for (std::size_t k = 0; k < steps; ++k) {
      const double g1 = g + sd * rng::normal(rng::key(s, rng::Stream::gaussian,
                                                      static_cast<std::int64_t>(k)));
      if (g1 <= 0.0) return 0.0;
      p *= 1.0 - bridge_meet_prob(g, g1, h);
      g = g1;
    }
    return p;
  });
  return mean_se(surv);
}

std::vector<EstimateReport> check_theta(std::span<const std::pair<double, double>> points,
                                        std::size_t replicas, std::uint64_t seed,
                                        const RunOptions& opts, double quad_tol) {
  std::vector<EstimateReport> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto [d, t] = points[k];
    const double exact = theta(d, t);
    const std::string tag = "d=" + fmt(d) + " t=" + fmt(t);

    EstimateReport q = base_report("check_theta", 0, seed);
    q.series = "quadrature " + tag;
    q.x = d;
    q.estimate = theta_quadrature(d, t);
    q.target = exact;
    q.tolerance = quad_tol;
    q.comparison = Comparison::two_sided;
    out.push_back(q.decide());

    const std::uint64_t s = rng::derive_seed(seed, k, 4);
    const MeanSe m = theta_monte_carlo(d, t, replicas, s, opts);
    EstimateReport mc = base_report("check_theta", replicas, s);
    mc.series = "monte_carlo " + tag;
    mc.x = d;
    mc.estimate = m.mean;
    mc.std_error = m.se;
    mc.target = exact;
    mc.tolerance = 3.0 * m.se;
    mc.comparison = Comparison::two_sided;
    out.push_back(mc.decide());
  }
  return out;
}

namespace {

double draw_coord(std::uint64_t s, std::int64_t a, std::int64_t b, double scale) {
  const double u = rng::uniform(rng::key(s, rng::Stream::start, a, b, 1));
  if (u < 0.05) return -kInf;
  if (u > 0.95) return kInf;
  return scale * rng::normal(rng::key(s, rng::Stream::start, a, b, 2));
}

Path random_path(std::uint64_t s, std::int64_t id) {
  const double kind = rng::uniform(rng::key(s, rng::Stream::start, id, 0, 3));
  const int n = 1 + static_cast<int>(4.0 * rng::uniform(rng::key(s, rng::Stream::start, id, 0, 4)));
  std::vector<Knot> ks;
  double t = -2.0 + 4.0 * rng::uniform(rng::key(s, rng::Stream::start, id, 0, 5));
  for (int k = 0; k < n; ++k) {
    ks.push_back({t, 2.0 * rng::normal(rng::key(s, rng::Stream::start, id, k, 6))});
    t += 0.05 + rng::exponential(rng::key(s, rng::Stream::start, id, k, 7));
  }
  if (kind < 0.05) return Path::sentinel(Sentinel::plus_infinity, ks.front().t);
  if (kind < 0.10) return Path::constant(ks.front().x, -kInf);
  if (kind < 0.20) return Path::from_minus_infinity(std::move(ks));
  return Path::polygonal(std::move(ks));
}

}  // namespace

std::vector<EstimateReport> check_metric_properties(std::size_t triples, std::uint64_t seed,
                                                    double tol) {
  std::size_t rho_sym = 0, rho_tri = 0, d_sym = 0, d_tri = 0, h_sym = 0, h_tri = 0, h_self = 0;
  for (std::size_t k = 0; k < triples; ++k) {
    const std::uint64_t s = rng::derive_seed(seed, k, 5);
    SpaceTimePoint pt[3];
    Path p[3] = {random_path(s, 0), random_path(s, 1), random_path(s, 2)};
    for (int i = 0; i < 3; ++i) pt[i] = {draw_coord(s, i, 0, 2.0), draw_coord(s, i, 1, 2.0)};

    if (rho(pt[0], pt[1]) != rho(pt[1], pt[0])) ++rho_sym;
    if (rho(pt[0], pt[2]) > rho(pt[0], pt[1]) + rho(pt[1], pt[2]) + 3.0 * tol) ++rho_tri;

    const double d01 = path_metric(p[0], p[1], tol), d10 = path_metric(p[1], p[0], tol);
    const double d12 = path_metric(p[1], p[2], tol), d02 = path_metric(p[0], p[2], tol);
    if (d01 != d10) ++d_sym;
    if (d02 > d01 + d12 + 3.0 * tol) ++d_tri;

    // Families: random subsets of six paths.
    std::vector<Path> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(random_path(s, 10 + i));
    std::vector<Path> fam[3];
    for (int f = 0; f < 3; ++f) {
      for (int i = 0; i < 6; ++i) {
        if (rng::uniform(rng::key(s, rng::Stream::arm, f, i)) < 0.5) fam[f].push_back(pool[i]);
      }
      if (fam[f].empty()) fam[f].push_back(pool[f]);
    }
    const double h01 = hausdorff(fam[0], fam[1], tol), h10 = hausdorff(fam[1], fam[0], tol);
    const double h12 = hausdorff(fam[1], fam[2], tol), h02 = hausdorff(fam[0], fam[2], tol);
    if (h01 != h10) ++h_sym;
    if (h02 > h01 + h12 + 3.0 * tol) ++h_tri;
    if (hausdorff(fam[0], fam[0], tol) != 0.0) ++h_self;
  }
  std::vector<EstimateReport> out;
  auto row = [&](const char* series, std::size_t bad) {
    EstimateReport r = base_report("check_metric_properties", triples, seed);
    r.series = series;
    r.estimate = static_cast<double>(bad);
    r.target = 0.0;
    r.comparison = Comparison::at_most;
    out.push_back(r.decide());
  };
  row("rho_symmetry", rho_sym);
  row("rho_triangle", rho_tri);
  row("path_metric_symmetry", d_sym);
  row("path_metric_triangle", d_tri);
  row("hausdorff_symmetry", h_sym);
  row("hausdorff_triangle", h_tri);
  row("hausdorff_self", h_self);
  return out;
}

std::vector<SpaceTimePoint> halton_points(std::size_t count, double x_lo, double x_hi,
                                          double t_lo, double t_hi) {
  auto radical = [](std::size_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    for (; i > 0; i /= base) {
      f /= base;
      r += f * static_cast<double>(i % base);
    }
    return r;
  };
  std::vector<SpaceTimePoint> out;
  for (std::size_t i = 1; i <= count; ++i) {
    out.push_back({x_lo + (x_hi - x_lo) * radical(i, 2), t_lo + (t_hi - t_lo) * radical(i, 3)});
  }
  return out;
}

std::vector<EstimateReport> check_skeleton_refinement(const SkeletonConfig& cfg,
                                                      std::span<const std::size_t> ks_in,
                                                      std::size_t replicas, std::uint64_t seed,
                                                      const RunOptions& opts) {
  std::vector<std::size_t> ks(ks_in.begin(), ks_in.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() == 0 || ks.back() > cfg.starts.size()) {
    throw ConfigError("refinement sizes must lie in [1, number of starts]");
  }
  cfg.validate();
  const std::size_t K = ks.back();
  const auto dist = run_replicas<std::vector<double>>(
      replicas, seed, opts, [&](std::size_t, std::uint64_t s) {
        SkeletonConfig c = cfg.reseeded(s);
        c.starts.resize(K);
        const SkeletonSample full = sample_skeleton(c);
        std::vector<double> d;
        for (std::size_t k : ks) {
          const std::span<const Path> prefix(full.paths.data(), k);
          d.push_back(hausdorff(prefix, full.paths));
        }
        return d;
      });

  std::vector<EstimateReport> out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    std::vector<double> v(replicas);
    for (std::size_t r = 0; r < replicas; ++r) v[r] = dist[r][i];
    const MeanSe m = mean_se(v);
    EstimateReport r = base_report("check_skeleton_refinement", replicas, seed);
    r.series = "hausdorff_to_full";
    r.x = static_cast<double>(ks[i]);
    r.estimate = m.mean;
    r.std_error = m.se;
    out.push_back(r.decide());
  }
  std::size_t bad = 0;
  for (const auto& d : dist) {
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      if (d[i + 1] > d[i]) {
        ++bad;
        break;
      }
    }
  }
  EstimateReport mono = base_report("check_skeleton_refinement", replicas, seed);
  mono.series = "nonincreasing_violations";
  mono.estimate = static_cast<double>(bad);
  mono.target = 0.0;
  mono.comparison = Comparison::at_most;
  out.push_back(mono.decide());
  return out;
}

}  // namespace bweb
