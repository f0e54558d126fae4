#pragma once

#include <cmath>
#include <cstdint>

namespace redistrict {

/// |population - target| / target. Shared by the samplers and the parity
/// metric so acceptance at sampling time and re-measurement agree exactly.
inline double relative_deviation(double population, double target) {
  return std::abs(population - target) / target;
}

inline bool within_tolerance(double population, double target, double tolerance) {
  return relative_deviation(population, target) <= tolerance;
}

/// Ideal district population: total / n_districts.
inline double ideal_population(std::int64_t total, int n_districts) {
  return static_cast<double>(total) / static_cast<double>(n_districts);
}

}  // namespace redistrict
