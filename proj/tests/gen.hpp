#pragma once

// Small deterministic generators for property tests.

#include <array>
#include <cmath>
#include <random>

#include "mixdg/eqstate.hpp"

namespace mixdg::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Random admissible 2D state with moderate Mach number.
  State<2> state2(const GasModel& gas) {
    const double rho = uniform(0.2, 3.0);
    const double p = uniform(0.2, 3.0);
    const Vec<2> v{uniform(-1.5, 1.5), uniform(-1.5, 1.5)};
    return from_primitive<2>(rho, v, p, gas);
  }

  State<3> state3(const GasModel& gas) {
    const double rho = uniform(0.2, 3.0);
    const double p = uniform(0.2, 3.0);
    const Vec<3> v{uniform(-1.5, 1.5), uniform(-1.5, 1.5), uniform(-1.5, 1.5)};
    return from_primitive<3>(rho, v, p, gas);
  }

  Vec<2> unit2() {
    const double th = uniform(0.0, 2.0 * 3.14159265358979323846);
    return {std::cos(th), std::sin(th)};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mixdg::testing
