#pragma once

#include "pmx/problem.hpp"

#include <cstdint>

namespace pmx::test {

/// n = m = r = 1, a = -1, B = 1, T = 1, l0 = 1, t1 = 0.5, H1 = D1 = Q = 1, f0 = 1.
Scenario canonical_scalar(std::size_t base_steps = 2000);

/// Scalar a = 0: X(T) = 1.
Scenario zero_drift();

/// A = [[0, 1], [-1, 0]], T = 2 pi: X(T) = E.
Scenario rotation(double period = 6.283185307179586);

struct RandomOptions {
  int max_n = 3;
  int max_points = 4;
  int max_intervals = 2;
  bool pointwise_only = false;
  std::size_t base_steps = 2000;
};

/// Stable random scenario; mixes real and complex data by seed.
Scenario random_scenario(std::uint64_t seed, const RandomOptions& options = {});

}  // namespace pmx::test
