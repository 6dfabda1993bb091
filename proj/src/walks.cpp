#include "bweb/walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bweb/error.hpp"
#include "bweb/json_io.hpp"
#include "bweb/rng.hpp"

namespace bweb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// IncrementLaw

IncrementLaw::IncrementLaw(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ConfigError("increment law has no atoms");
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.step < b.step; });
  Rational total;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (k > 0 && atoms_[k].step == atoms_[k - 1].step) {
      throw ConfigError("increment law lists step " + std::to_string(atoms_[k].step) + " twice");
    }
    if (!(atoms_[k].p > Rational(0))) throw ConfigError("increment probabilities must be positive");
    total = total + atoms_[k].p;
    max_abs_step_ = std::max(max_abs_step_, std::abs(atoms_[k].step));
  }
  if (!(total == Rational(1))) {
    throw ConfigError("increment probabilities sum to " + total.to_string() + ", not 1");
  }
  if (!(mean() == Rational(0))) {
    throw ConfigError("increment law has mean " + mean().to_string() + ", must be 0");
  }
  if (!(variance() > Rational(0))) throw ConfigError("increment law has zero variance");

  std::int64_t den = 1;
  for (const Atom& a : atoms_) den = std::lcm(den, a.p.den());
  common_den_ = static_cast<std::uint64_t>(den);
  std::uint64_t acc = 0;
  for (const Atom& a : atoms_) {
    acc += static_cast<std::uint64_t>(a.p.num() * (den / a.p.den()));
    cumulative_.push_back(acc);
  }
}

IncrementLaw IncrementLaw::simple() {
  return IncrementLaw({{-1, Rational(1, 2)}, {1, Rational(1, 2)}});
}

Rational IncrementLaw::mean() const {
  Rational m;
  for (const Atom& a : atoms_) m = m + Rational(a.step) * a.p;
  return m;
}

Rational IncrementLaw::variance() const {
  Rational v;
  for (const Atom& a : atoms_) v = v + Rational(a.step) * Rational(a.step) * a.p;
  const Rational m = mean();
  return v - m * m;
}

bool IncrementLaw::is_simple() const {
  return atoms_.size() == 2 && atoms_[0].step == -1 && atoms_[1].step == 1;
}

int IncrementLaw::sample(std::uint64_t bits) const {
  const auto r = static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(bits) * common_den_) >> 64);
  for (std::size_t k = 0; k < cumulative_.size(); ++k) {
    if (r < cumulative_[k]) return atoms_[k].step;
  }
  return atoms_.back().step;
}

// ---------------------------------------------------------------------------
// fields

IncrementField::IncrementField(std::uint64_t seed, IncrementLaw law)
    : seed_(seed), law_(std::move(law)) {}

std::uint64_t IncrementField::rng_key(std::int64_t i, std::int64_t j) const {
  return rng::key(seed_, rng::Stream::coin, i, j);
}

void ClockField::script(std::int64_t site, std::vector<ClockEvent> events) {
  std::sort(events.begin(), events.end(),
            [](const ClockEvent& a, const ClockEvent& b) { return a.time < b.time; });
  for (const ClockEvent& e : events) {
    if (e.direction != 1 && e.direction != -1) throw ConfigError("clock direction must be +-1");
  }
  scripted_[site] = std::move(events);
}

std::vector<ClockEvent> ClockField::block(std::int64_t site, std::int64_t b) const {
  const int n = rng::poisson(rng::key(seed_, rng::Stream::clock_count, site, b), 1.0);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    times[m] = static_cast<double>(b) +
               rng::uniform(rng::key(seed_, rng::Stream::clock_time, site, b, m));
  }
  std::sort(times.begin(), times.end());
  std::vector<ClockEvent> out;
  out.reserve(times.size());
  for (int m = 0; m < n; ++m) {
    const std::uint64_t coin = rng::key(seed_, rng::Stream::clock_direction, site, b, m);
    out.push_back({times[m], (coin >> 63) ? 1 : -1});
  }
  return out;
}

std::vector<ClockEvent> ClockField::events(std::int64_t site, double lo, double hi) const {
  std::vector<ClockEvent> out;
  if (!(lo < hi)) return out;
  if (auto it = scripted_.find(site); it != scripted_.end()) {
    for (const ClockEvent& e : it->second) {
      if (e.time >= lo && e.time < hi) out.push_back(e);
    }
    return out;
  }
  const auto b_lo = static_cast<std::int64_t>(std::floor(lo));
  const auto b_hi = static_cast<std::int64_t>(std::floor(hi));
  for (std::int64_t b = b_lo; b <= b_hi; ++b) {
    for (const ClockEvent& e : block(site, b)) {
      if (e.time >= lo && e.time < hi) out.push_back(e);
    }
  }
  return out;
}

std::optional<ClockEvent> ClockField::next_event(std::int64_t site, double t, bool inclusive,
                                                 double limit) const {
  auto after = [&](const ClockEvent& e) { return inclusive ? e.time >= t : e.time > t; };
  if (auto it = scripted_.find(site); it != scripted_.end()) {
    for (const ClockEvent& e : it->second) {
      if (after(e)) {
        if (e.time > limit) return std::nullopt;
        return e;
      }
    }
    return std::nullopt;
  }
  for (auto b = static_cast<std::int64_t>(std::floor(t));; ++b) {
    if (static_cast<double>(b) > limit) return std::nullopt;
    for (const ClockEvent& e : block(site, b)) {
      if (after(e)) {
        if (e.time > limit) return std::nullopt;
        return e;
      }
    }
  }
}

std::optional<ClockEvent> ClockField::last_event(std::int64_t site, double t,
                                                 double limit) const {
  if (auto it = scripted_.find(site); it != scripted_.end()) {
    std::optional<ClockEvent> found;
    for (const ClockEvent& e : it->second) {
      if (e.time <= t) found = e;
    }
    if (found && found->time < limit) return std::nullopt;
    return found;
  }
  for (auto b = static_cast<std::int64_t>(std::floor(t));; --b) {
    if (static_cast<double>(b + 1) < limit) return std::nullopt;
    const auto evs = block(site, b);
    for (auto it = evs.rbegin(); it != evs.rend(); ++it) {
      if (it->time <= t) {
        if (it->time < limit) return std::nullopt;
        return *it;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// system configuration

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::discrete_parity:
      return "discrete_parity";
    case SystemKind::continuous_time:
      return "continuous_time";
    case SystemKind::discrete_crossing:
      return "discrete_crossing";
  }
  return "?";
}

SystemKind system_kind_from(const std::string& name) {
  if (name == "discrete_parity") return SystemKind::discrete_parity;
  if (name == "continuous_time") return SystemKind::continuous_time;
  if (name == "discrete_crossing") return SystemKind::discrete_crossing;
  throw ConfigError("unknown system kind \"" + name + "\"");
}

void CoalescingSystem::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be positive");
  if (!(window.x_lo < window.x_hi) || !(window.t_lo < window.t_hi)) {
    throw ConfigError("window must have lo < hi in both coordinates");
  }
  if (kind != SystemKind::discrete_crossing && !law.is_simple()) {
    throw ConfigError(to_string(kind) + " requires the +-1 fair increment law");
  }
}

namespace {

Rational probability_from(const json& j) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return Rational::from_double(j.get<double>());
  throw ConfigError("probability must be a number or \"p/q\" string");
}

std::pair<double, double> range_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("window range must be [lo, hi]");
  return {decode_extended(j[0]), decode_extended(j[1])};
}

}  // namespace

CoalescingSystem system_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("system config must be a JSON object");
    CoalescingSystem s;
    s.kind = system_kind_from(j.at("kind").get<std::string>());
    if (j.contains("increments")) {
      std::vector<IncrementLaw::Atom> atoms;
      for (const json& a : j.at("increments")) {
        if (!a.is_array() || a.size() != 2) throw ConfigError("increment must be [step, p]");
        atoms.push_back({a[0].get<int>(), probability_from(a[1])});
      }
      s.law = IncrementLaw(std::move(atoms));
    }
    if (j.contains("delta")) s.delta = j.at("delta").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("window")) {
      const json& w = j.at("window");
      if (w.contains("x")) std::tie(s.window.x_lo, s.window.x_hi) = range_from(w.at("x"));
      if (w.contains("t")) std::tie(s.window.t_lo, s.window.t_hi) = range_from(w.at("t"));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed system config: ") + e.what());
  }
}

json system_to_json(const CoalescingSystem& s) {
  json inc = json::array();
  for (const auto& a : s.law.atoms()) inc.push_back({a.step, a.p.to_string()});
  return {{"kind", to_string(s.kind)},
          {"increments", std::move(inc)},
          {"delta", s.delta},
          {"window",
           {{"x", {encode_extended(s.window.x_lo), encode_extended(s.window.x_hi)}},
            {"t", {encode_extended(s.window.t_lo), encode_extended(s.window.t_hi)}}}},
          {"seed", s.seed}};
}

// ---------------------------------------------------------------------------
// discrete-time walks

namespace {

void check_start_in_window(const Window& w, double x, double t) {
  if (!w.contains_x(x) || !w.contains_t(t)) {
    throw WindowOverflow("start (" + std::to_string(x) + ", " + std::to_string(t) +
                         ") lies outside the window");
  }
}

}  // namespace

std::vector<Path> discrete_paths(const CoalescingSystem& system, const IncrementField& field,
                                 std::span<const LatticePoint> starts, std::int64_t horizon) {
  system.validate();
  if (system.kind == SystemKind::continuous_time) {
    throw ConfigError("discrete walks need a discrete system kind");
  }
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  const bool parity = system.kind == SystemKind::discrete_parity;
  const Window& w = system.window;

  std::vector<Path> out;
  out.reserve(starts.size());
  for (const LatticePoint& s : starts) {
    if (parity && ((s.i + s.j) % 2 != 0)) {
      throw ConfigError("start (" + std::to_string(s.i) + ", " + std::to_string(s.j) +
                        ") violates the parity constraint i + j even");
    }
    check_start_in_window(w, static_cast<double>(s.i), static_cast<double>(s.j));
    if (static_cast<double>(s.j + horizon) > w.t_hi) {
      throw WindowOverflow("horizon runs past the time window");
    }
    std::vector<Knot> knots;
    knots.reserve(static_cast<std::size_t>(horizon) + 1);
    std::int64_t i = s.i;
    knots.push_back({static_cast<double>(s.j), static_cast<double>(i)});
    for (std::int64_t j = s.j; j < s.j + horizon; ++j) {
      i += field(i, j);
      if (!w.contains_x(static_cast<double>(i))) {
        throw WindowOverflow("walker left the spatial window at time " + std::to_string(j + 1));
      }
      knots.push_back({static_cast<double>(j + 1), static_cast<double>(i)});
    }
    out.push_back(Path::polygonal(std::move(knots)));
  }
  return out;
}

PathFamily simulate_discrete(const CoalescingSystem& system, const IncrementField& field,
                             std::span<const LatticePoint> starts, std::int64_t horizon) {
  return PathFamily(discrete_paths(system, field, starts, horizon));
}

PathFamily simulate_discrete(const CoalescingSystem& system,
                             std::span<const LatticePoint> starts, std::int64_t horizon) {
  return simulate_discrete(system, system.increments(), starts, horizon);
}

PathFamily simulate_crossing(const CoalescingSystem& system,
                             std::span<const LatticePoint> starts, std::int64_t horizon) {
  if (system.kind != SystemKind::discrete_crossing) {
    throw ConfigError("simulate_crossing needs a discrete_crossing system");
  }
  return simulate_discrete(system, starts, horizon);
}

// ---------------------------------------------------------------------------
// continuous-time walks

namespace {

// Follows the jump chain from an event at (site, time) until a knot reaches
// the horizon.
void follow_jumps(const ClockField& clocks, const Window& w, std::int64_t site,
                  ClockEvent event, double horizon, std::vector<Knot>& knots) {
  while (knots.back().t < horizon) {
    const std::int64_t dest = site + event.direction;
    if (!w.contains_x(static_cast<double>(dest))) {
      throw WindowOverflow("walker left the spatial window");
    }
    const auto arrival = clocks.next_event(dest, event.time, false, w.t_hi);
    if (!arrival) throw WindowOverflow("clock window exhausted before the horizon");
    knots.push_back({arrival->time, static_cast<double>(dest)});
    site = dest;
    event = *arrival;
  }
}

}  // namespace

std::vector<Path> continuous_paths(const CoalescingSystem& system, const ClockField& clocks,
                                   std::span<const ContinuousStart> starts, double horizon) {
  system.validate();
  if (system.kind != SystemKind::continuous_time) {
    throw ConfigError("continuous walks need a continuous_time system");
  }
  const Window& w = system.window;
  if (!(horizon > w.t_lo) || horizon > w.t_hi) {
    throw WindowOverflow("horizon lies outside the clock window");
  }
  std::vector<Path> out;
  for (const ContinuousStart& s : starts) {
    check_start_in_window(w, static_cast<double>(s.site), s.time);
    if (!(horizon > s.time)) throw ConfigError("horizon must exceed every start time");
    const auto first = clocks.next_event(s.site, s.time, true, w.t_hi);
    if (!first) throw WindowOverflow("clock window exhausted before the horizon");

    if (first->time == s.time) {
      // Start on an event: the path that jumps at once ...
      std::vector<Knot> jump{{s.time, static_cast<double>(s.site)}};
      follow_jumps(clocks, w, s.site, *first, horizon, jump);
      out.push_back(Path::polygonal(std::move(jump)));
      // ... and the one that waits for the next event.
      const auto next = clocks.next_event(s.site, s.time, false, w.t_hi);
      if (!next) throw WindowOverflow("clock window exhausted before the horizon");
      std::vector<Knot> wait{{s.time, static_cast<double>(s.site)},
                             {next->time, static_cast<double>(s.site)}};
      follow_jumps(clocks, w, s.site, *next, horizon, wait);
      out.push_back(Path::polygonal(std::move(wait)));
      continue;
    }
    std::vector<Knot> knots{{s.time, static_cast<double>(s.site)},
                            {first->time, static_cast<double>(s.site)}};
    follow_jumps(clocks, w, s.site, *first, horizon, knots);
    out.push_back(Path::polygonal(std::move(knots)));
  }
  return out;
}

PathFamily simulate_continuous(const CoalescingSystem& system, const ClockField& clocks,
                               std::span<const ContinuousStart> starts, double horizon) {
  return PathFamily(continuous_paths(system, clocks, starts, horizon));
}

PathFamily simulate_continuous(const CoalescingSystem& system,
                               std::span<const ContinuousStart> starts, double horizon) {
  return simulate_continuous(system, system.clocks(), starts, horizon);
}

// ---------------------------------------------------------------------------
// rescaling and boundary paths

Path rescale(const Path& p, double delta) {
  if (!(delta > 0.0)) throw ConfigError("rescale: delta must be positive");
  if (p.is_sentinel()) return p;
  const double d2 = delta * delta;
  std::vector<Knot> knots;
  knots.reserve(p.knots().size());
  for (const Knot& k : p.knots()) knots.push_back({d2 * k.t, delta * k.x});
  if (p.start_time() == -kInf) return Path::from_minus_infinity(std::move(knots));
  return Path::polygonal(std::move(knots));
}

std::vector<Path> rescale(std::span<const Path> paths, double delta) {
  std::vector<Path> out;
  out.reserve(paths.size());
  for (const Path& p : paths) out.push_back(rescale(p, delta));
  return out;
}

PathFamily rescale(const PathFamily& family, double delta) {
  return PathFamily(rescale(family.paths(), delta), family.dedup_tol());
}

PathFamily boundary_paths(std::optional<std::pair<std::int64_t, std::int64_t>> integer_starts) {
  std::vector<Path> paths;
  for (double s0 : {-kInf, kInf}) {
    paths.push_back(Path::sentinel(Sentinel::plus_infinity, s0));
    paths.push_back(Path::sentinel(Sentinel::minus_infinity, s0));
  }
  if (integer_starts) {
    for (std::int64_t s = integer_starts->first; s <= integer_starts->second; ++s) {
      paths.push_back(Path::sentinel(Sentinel::plus_infinity, static_cast<double>(s)));
      paths.push_back(Path::sentinel(Sentinel::minus_infinity, static_cast<double>(s)));
    }
  }
  return PathFamily(std::move(paths));
}

}  // namespace bweb
