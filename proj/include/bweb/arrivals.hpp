#pragma once

// Arrival sampler for lattice systems.
//
// With shared randomness, every path touching (x, t0) follows from t0 on the
// walker that stands at (x, t0), so eta(t0, t; a, b) is the number of
// distinct positions at t0 + t of the walkers started from every point of
// [a, b] x {t0} that some path occupies. Those points are:
//   parity / crossing: the admissible sites i at lattice time j = floor(t0),
//     displaced by frac(t0) * Delta(i, j) when t0 is off the lattice;
//   continuous_time: every integer site, plus the points of [a, b] crossed at
//     t0 by segments still in flight towards a neighbouring site.
// Walkers are grouped into clusters that move together, so the cost per
// step is the number of distinct positions, not the number of starts.
//
// Inputs and outputs are in rescaled units (space delta, time delta^2).

#include <span>
#include <vector>

#include "bweb/walks.hpp"

namespace bweb {

struct ArrivalSample {
  // Touched positions at t0, ascending.
  std::vector<double> starts;
  // positions[k][w]: position of walker w at t0 + times[k].
  std::vector<std::vector<double>> positions;
};

// `times` are lags t > 0, in any order. Throws WindowOverflow when a walker
// leaves the system's window.
ArrivalSample lattice_arrivals(const CoalescingSystem& system, double t0, double a, double b,
                               std::span<const double> times);
ArrivalSample lattice_arrivals(const CoalescingSystem& system, const IncrementField& field,
                               double t0, double a, double b, std::span<const double> times);
ArrivalSample lattice_arrivals(const CoalescingSystem& system, const ClockField& clocks,
                               double t0, double a, double b, std::span<const double> times);

}  // namespace bweb
