#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "iontrap/vec3.hpp"

namespace gen {

// Fixed-seed source for property tests; every case is reproducible from
// (seed, index).
class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  iontrap::Vec3 in_ball(double radius) {
    for (;;) {
      const iontrap::Vec3 p{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
      if (iontrap::norm2(p) <= 1.0) return radius * p;
    }
  }

  iontrap::Vec3 unit_vector() {
    for (;;) {
      const iontrap::Vec3 p = in_ball(1.0);
      const double n = iontrap::norm(p);
      if (n > 1e-3) return p / n;
    }
  }

 private:
  std::mt19937_64 rng_;
};

inline constexpr int default_cases = 200;

} // namespace gen
