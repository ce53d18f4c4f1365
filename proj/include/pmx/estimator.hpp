#pragma once

#include "pmx/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pmx {

/// u = (u_1, ..., u_N, u_1(.), ..., u_M(.)); interval parts live on the grid
/// nodes of their interval, endpoints included.
struct ControlVector {
  std::vector<Vector> points;
  std::vector<NodeFunction> intervals;
};

ControlVector zero_control(const PreparedScenario& prep);

/// y_i per point and node samples of y_j(t) per interval.
struct ObservationData {
  std::vector<Vector> points;
  std::vector<NodeFunction> intervals;
  struct Provenance {
    std::string forcing = "unspecified";
    std::uint64_t noise_seed = 0;
    double budget_points = 0.0;
    double budget_intervals = 0.0;
  } provenance;
};

struct MinimaxSolution {
  ControlVector u_hat;
  Complex c_hat;
  double sigma = 0.0;
  Complex l_p;
  ImpulsiveTrajectory z_hat;
  ImpulsiveTrajectory p;
  double cost_at_optimum = 0.0;
};

struct OnlineSolution {
  ImpulsiveTrajectory p_hat;
  ImpulsiveTrajectory x_hat;
  Complex estimate_value;
};

/// z(.; u): -dz/dt = A* z + l0 - sum_j chi_j H_j* u_j, jumps H_i* u_i, periodic.
ImpulsiveTrajectory adjoint_state(const PreparedScenario& prep, const ControlVector& u);

/// Parts of I(u): the bias term int (Q~ z, z) dt and the two noise terms.
struct CostTerms {
  double bias = 0.0;
  double noise_points = 0.0;
  double noise_intervals = 0.0;
  double total() const { return bias + noise_points + noise_intervals; }
};

double bias_term(const PreparedScenario& prep, const ImpulsiveTrajectory& z);
CostTerms cost_terms(const PreparedScenario& prep, const ControlVector& u);
double cost(const PreparedScenario& prep, const ControlVector& u);

/// c = int (f0, B* z) dt.
Complex c_hat_from(const PreparedScenario& prep, const ImpulsiveTrajectory& z_hat);

/// Stacked (z^, p) periodic impulsive system; u^, c^, sigma = [Re l(p)]^{1/2}.
/// Throws DegenerateBVP when the closure is singular and
/// NumericalInconsistency when Re l(p) is negative beyond rounding.
MinimaxSolution solve_offline(const PreparedScenario& prep);

/// Stacked (p^, x^) system driven by the observations; estimate = l(x^).
OnlineSolution solve_online(const PreparedScenario& prep, const ObservationData& obs);

/// sum_i (y_i, u_i) + sum_j int (y_j, u_j) dt + c.
Complex apply_estimator(const MinimaxSolution& minimax, const ObservationData& obs);

/// Throws ObservationMismatch when sizes, dimensions or sample nodes differ
/// from the scheme.
void check_observations(const PreparedScenario& prep, const ObservationData& obs);

/// Sum of squared component norms; interval parts by Simpson.
double norm_squared(const ControlVector& u);

}  // namespace pmx
