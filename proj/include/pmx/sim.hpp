#pragma once

#include "pmx/estimator.hpp"
#include "pmx/scenario_io.hpp"

#include <cstdint>
#include <vector>

namespace pmx {

/// splitmix64 step; used to derive independent per-replication seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Periodic solution under forcing B(t) f(t).
ImpulsiveTrajectory simulate_truth(const PreparedScenario& prep, const VectorField& f_tilde);
ImpulsiveTrajectory simulate_truth(const PreparedScenario& prep, const MatrixFunction& f_tilde);

/// f0 + s delta / rho with delta a random trigonometric polynomial of
/// order 3 and rho^2 = int (Q delta, delta) dt on the grid; s = 1 on the
/// boundary of G1, otherwise uniform in [0, 1].
MatrixFunction sample_f_in_G1(const PreparedScenario& prep, std::uint64_t seed, bool boundary);

/// int (Q (f - f0), f - f0) dt on the grid.
double g1_membership(const PreparedScenario& prep, const MatrixFunction& f);

struct NoiseRealization {
  std::vector<Vector> points;
  std::vector<NodeFunction> intervals;
};

/// Circular complex Gaussian noise. Point i: covariance w_i D_i^{-1} / m.
/// Interval j: independent per node with covariance (w_j / |Omega_j|) D_j^{-1} / l,
/// so the Simpson trace budget equals w_j. Each weight group must sum to at
/// most 1 (BudgetExceeded otherwise).
NoiseRealization sample_noise(const PreparedScenario& prep, std::uint64_t seed, const std::vector<double>& point_weights,
                              const std::vector<double>& interval_weights);

/// Even split of the two budgets over the slots.
NoiseRealization sample_noise(const PreparedScenario& prep, std::uint64_t seed, double budget_points,
                              double budget_intervals);

NoiseRealization zero_noise(const PreparedScenario& prep);

/// y_i = H_i x(t_i) + xi_i, y_j(t_k) = H_j(t_k) x(t_k) + xi_j(t_k).
ObservationData make_observations(const PreparedScenario& prep, const ImpulsiveTrajectory& x_tilde,
                                  const NoiseRealization& noise);

Json observations_to_json(const ObservationData& obs);
/// Interval sample times must coincide with the grid nodes of Omega_j.
ObservationData observations_from_json(const PreparedScenario& prep, const Json& j);

}  // namespace pmx
