#pragma once

// Monte Carlo estimators and hypothesis checks.
//
// Every estimator takes a run seed and derives one seed per replica, runs the
// replicas on `workers` threads, stores per-replica results by index and
// aggregates them afterwards in index order. Results therefore do not depend
// on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bweb/brownian.hpp"
#include "bweb/counting.hpp"
#include "bweb/rng.hpp"
#include "bweb/walks.hpp"

namespace bweb {

inline constexpr const char* kReportSchema = "bweb.report/1";

enum class Comparison { two_sided, at_most, at_least, none };
enum class Verdict { pass, fail, informational, not_applicable };

std::string to_string(Comparison c);
std::string to_string(Verdict v);

struct EstimateReport {
  std::string name;
  std::string series;  // curve label for multi-row checks, else empty
  double x = std::numeric_limits<double>::quiet_NaN();  // curve abscissa
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  std::optional<double> target;
  double tolerance = 0.0;
  Comparison comparison = Comparison::none;
  Verdict verdict = Verdict::informational;
  std::uint64_t seed = 0;
  std::string config_digest;

  // two_sided: |estimate - target| <= tolerance
  // at_most:   estimate <= target + tolerance
  // at_least:  estimate >= target - tolerance
  // none, or no target: informational
  EstimateReport& decide();
};

struct RunOptions {
  unsigned workers = 1;
};

// ---------------------------------------------------------------------------
// replica plumbing

// f(index, replica_seed) -> R, for index in [0, n). Output is index-aligned.
template <class R, class F>
std::vector<R> run_replicas(std::size_t n, std::uint64_t seed, const RunOptions& opts, F&& f) {
  std::vector<std::optional<R>> slots(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, n ? n : 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(f(i, rng::derive_seed(seed, i)));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) {
            slots[i].emplace(f(i, rng::derive_seed(seed, i)));
          }
        } catch (...) {
          errors[w] = std::current_exception();
          next = n;
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// Pairwise (cascade) summation; fixed association for a fixed length.
double pairwise_sum(std::span<const double> v);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
// Sample mean and its standard error sd / sqrt(n).
MeanSe mean_se(std::span<const double> v);
// Proportion of true flags and its binomial standard error.
MeanSe proportion(std::span<const char> flags);

// ---------------------------------------------------------------------------
// distribution tests

// sup |F_n - F| for a continuous reference F; ties handled exactly.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

struct KsTwoSample {
  double d = 0.0;
  double p_value = 1.0;
};
// Two-sample statistic with the asymptotic Kolmogorov p-value.
KsTwoSample ks_two_sample(std::vector<double> x, std::vector<double> y);

// Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

// DKW half-width: P(sup |F_n - F| > eps) <= alpha.
double dkw_epsilon(std::size_t n, double alpha);

double normal_cdf(double x, double variance = 1.0);

// ---------------------------------------------------------------------------
// fits

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LineFit ols(std::span<const double> x, std::span<const double> y);

// Weighted least squares through the origin (weights 1 / se^2 when given).
LineFit fit_through_origin(std::span<const double> x, std::span<const double> y,
                           std::span<const double> se = {});

// ---------------------------------------------------------------------------
// sources and samples

using Source = std::variant<CoalescingSystem, SkeletonConfig>;

Source reseeded(const Source& src, std::uint64_t seed);

// k equally spaced starts on [a, b] x {t0} (a single start at a when k == 1).
std::vector<SpaceTimePoint> interval_starts(double a, double b, double t0, std::size_t k);

// One replica of the arrival counts for [a, b] x {t0} at each lag, using the
// source's own seed. Skeleton horizons are extended to cover the lags.
std::vector<CountResult> sample_counts(const Source& src, double t0, double a, double b,
                                       std::span<const double> lags, double match_tol = 0.0);

// Paths touching [a, b] x {t0}: positions at t0 and at t0 + lag. Used for
// nested sub-interval counts.
struct TouchSample {
  std::vector<double> starts;
  std::vector<double> ends;

  CountResult restrict(double a, double b, double match_tol = 0.0) const;
};
TouchSample sample_touches(const Source& src, double t0, double a, double b, double lag);

// Default anchors (a, t0) over which suprema are taken: the parity phases of
// a lattice, or the single anchor (0, 0) for a skeleton.
std::vector<SpaceTimePoint> default_anchors(const Source& src);

// Cover of [-L, L] x [-T, T] by u/2 x t boxes, as anchor points.
struct ScanGrid {
  double L = 0.0;
  double T = 0.0;
  double u = 1.0;
  double t = 1.0;

  std::vector<SpaceTimePoint> points() const;
};

// ---------------------------------------------------------------------------
// estimators

// Mean of eta with target 1 + (b - a) / sqrt(pi t); pass when within
// max(3 SE, rel_tol * target). `target` overrides the formula.
EstimateReport est_eta_mean(const Source& src, const CountingQuery& q, std::size_t replicas,
                            std::uint64_t seed, const RunOptions& opts = {},
                            double rel_tol = 0.05, std::optional<double> target = {});

// P(eta-hat >= k) against Theta(b - a, t)^k. One-sided (<= bound + 3 SE)
// unless `equality` asks for the two-sided comparison.
EstimateReport est_eta_tail(const Source& src, const CountingQuery& q, int k,
                            std::size_t replicas, std::uint64_t seed,
                            const RunOptions& opts = {}, bool equality = false);

// P(eta >= k) <= P(eta >= 2)^(k - 1) on a lattice; target is the right side.
EstimateReport check_rw_bound(const CoalescingSystem& system, const CountingQuery& q, int k,
                              std::size_t replicas, std::uint64_t seed,
                              const RunOptions& opts = {});

struct DonskerOptions {
  double alpha = 0.01;
  // Overrides the DKW band + 2 delta / sqrt(t) thresholds when set.
  std::optional<double> marginal_threshold;
  std::optional<double> meeting_threshold;
  double pair_gap = 1.0;            // rescaled distance of the walker pair
  std::vector<double> meeting_grid;  // empty: skip the pair check
};

// Rows: one KS row per marginal time, one exact-variance row per time, and
// the meeting-time sup distance when a grid is given.
std::vector<EstimateReport> check_donsker(const CoalescingSystem& system,
                                          std::span<const double> times, std::size_t replicas,
                                          std::uint64_t seed, const RunOptions& opts = {},
                                          const DonskerOptions& dopts = {});

struct CurveOptions {
  double t0 = 0.0;
  std::vector<SpaceTimePoint> anchors;  // empty: default_anchors(src)
  double match_tol = 0.0;
  double threshold = 0.05;  // B2: bound on the smallest-eps value
  double slope_rel_tol = 0.2;
};

// sup P(eta-hat(t0, t; a, a + eps) >= 1) per eps, and a slope fit through
// the origin against 1 / sqrt(pi t).
std::vector<EstimateReport> est_B1(const Source& src, double t, std::span<const double> eps,
                                   std::size_t replicas, std::uint64_t seed,
                                   const RunOptions& opts = {}, const CurveOptions& c = {});

// eps^-1 sup P(eta-hat >= 2) per eps; gated on the curve shrinking with eps
// (3 SE slack) and on its smallest-eps value.
std::vector<EstimateReport> est_B2(const Source& src, double t, std::span<const double> eps,
                                   std::size_t replicas, std::uint64_t seed,
                                   const RunOptions& opts = {}, const CurveOptions& c = {});

// On [a - eps, a + eps]: sup P(|N| > 1) and eps^-1 sup P(N != N+ u N-).
std::vector<EstimateReport> est_B1p_B2p(const Source& src, double t,
                                        std::span<const double> eps, std::size_t replicas,
                                        std::uint64_t seed, const RunOptions& opts = {},
                                        const CurveOptions& c = {});

// t^-1 sup P(A_{t,u}(x0, t0)) per (u, t); gated per u on the values falling
// as t falls. Lattices use their phases, skeletons sweep `scan` when given.
std::vector<EstimateReport> est_T1(const Source& src, std::span<const double> u_grid,
                                   std::span<const double> t_grid, std::size_t replicas,
                                   std::uint64_t seed, const RunOptions& opts = {},
                                   std::optional<ScanGrid> scan = {});

// Median over paths and windows of sup_{s in [r, r + lag]} |f(s) - f(r)|.
double oscillation(const Path& p, double r, double lag);

struct HolderOptions {
  double horizon = 1.0;
  double lo = 0.40;
  double hi = 0.55;
  std::size_t windows = 8;  // window anchors per path
};

// Log-log slope of the median oscillation against the lag.
EstimateReport est_holder(const Source& src, std::span<const double> lags, std::size_t replicas,
                          std::uint64_t seed, const RunOptions& opts = {},
                          const HolderOptions& h = {});
EstimateReport holder_from_paths(std::span<const Path> paths, std::span<const double> lags,
                                 const HolderOptions& h = {});

// Two-sample KS on eta between the given order and the permuted one. Rows:
// the p-value (gate: > alpha) and the KS distance (informational).
std::vector<EstimateReport> check_order_invariance(const SkeletonConfig& cfg,
                                                   std::span<const std::size_t> permutation,
                                                   const CountingQuery& q, std::size_t replicas,
                                                   std::uint64_t seed,
                                                   const RunOptions& opts = {},
                                                   bool shared_seed = false,
                                                   double alpha = 0.01);

// Theta(d, t) by Gauss-Legendre quadrature of the gap density with the
// reflected image removed.
double theta_quadrature(double d, double t);

// Monte Carlo P(no meeting by t) for two independent Brownian motions d
// apart. The gap is sampled on `steps` grid points and each replica
// contributes its conditional survival probability given those points, from
// the bridge hitting probability.
MeanSe theta_monte_carlo(double d, double t, std::size_t replicas, std::uint64_t seed,
                         const RunOptions& opts = {}, std::size_t steps = 64);

// Rows per (d, t): quadrature vs closed form, and Monte Carlo vs closed form.
std::vector<EstimateReport> check_theta(std::span<const std::pair<double, double>> points,
                                        std::size_t replicas, std::uint64_t seed,
                                        const RunOptions& opts = {}, double quad_tol = 1e-10);

// Random triples of points and paths: symmetry of rho, path_metric and
// hausdorff, their triangle inequalities within 3 tol, and d_H(A, A) = 0.
// Each row counts violations and passes at 0.
std::vector<EstimateReport> check_metric_properties(std::size_t triples, std::uint64_t seed,
                                                    double tol = kDefaultMetricTol);

// First `count` points of a Halton sequence on [x_lo, x_hi] x [t_lo, t_hi].
std::vector<SpaceTimePoint> halton_points(std::size_t count, double x_lo, double x_hi,
                                          double t_lo, double t_hi);

// Nested skeletons W_k on the prefixes of one start list with shared
// randomness: d_H(W_k, W_K) for each k in `ks` (K = the largest). Rows: the
// mean distance per k, and the number of replicas in which it increases with k.
std::vector<EstimateReport> check_skeleton_refinement(const SkeletonConfig& cfg,
                                                      std::span<const std::size_t> ks,
                                                      std::size_t replicas, std::uint64_t seed,
                                                      const RunOptions& opts = {});

// Replicas in which eta fails to be nonincreasing along t_grid; must be 0.
// Not applicable to crossing systems.
EstimateReport check_monotonicity(const Source& src, const CountingQuery& q,
                                  std::span<const double> t_grid, std::size_t replicas,
                                  std::uint64_t seed, const RunOptions& opts = {});

}  // namespace bweb
