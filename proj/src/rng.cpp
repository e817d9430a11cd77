#include "sedsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sedsim {

void CounterRng::normal_pair_at(std::uint64_t key, std::uint64_t i, double& g0, double& g1) {
  const double u1 = uniform_at(key, 2 * i);
  const double u2 = uniform_at(key, 2 * i + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  g0 = radius * std::cos(angle);
  g1 = radius * std::sin(angle);
}

double CounterRng::normal() {
  // One Box-Muller pair per call; the sine half is discarded so that the
  // stream position stays a plain counter.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 CounterRng::unit_vector() {
  const double z = 2.0 * uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform();
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

}  // namespace sedsim
