#pragma once

#include "pmx/estimator.hpp"

#include <vector>

namespace pmx {

struct ReductionTables {
  /// (E - Z(T))^{-1} Z(T); M_i(t) adds E for t in (t_i, T].
  Matrix resolvent_part;
  std::vector<std::size_t> point_nodes;
  /// C0 and C_k at every node (C_k from the right segment at t_k).
  std::vector<Vector> C0;
  std::vector<std::vector<Matrix>> Ck;
  Matrix alpha;  // N n x N n, blocks alpha_ik
  Vector b;      // N n, blocks b_i
  ImpulsiveTrajectory zbar0;

  /// M_i(t) as seen from inside `segment`.
  Matrix M(std::size_t i, std::size_t segment, const TimeGrid& grid) const;
};

/// Periodic solution of -z' = A* z + l0 in closed Cauchy form.
ImpulsiveTrajectory zbar0(const PreparedScenario& prep);

/// Z(t) M_i(t) Z^{-1}(t_i) H_i* u_i, with the jump H_i* u_i at t_i.
ImpulsiveTrajectory zbar_i(const PreparedScenario& prep, std::size_t i, const Vector& u_i);

/// Throws HasIntervals when the scheme has interval observations.
ReductionTables assemble_reduction(const PreparedScenario& prep);

/// Solves p(t_i) + sum_k alpha_ik p(t_k) = b_i and rebuilds u^, z^, p, c^,
/// sigma. Throws SingularReduction when the system is numerically singular.
MinimaxSolution solve_pointwise(const PreparedScenario& prep);
MinimaxSolution solve_pointwise(const PreparedScenario& prep, const ReductionTables& tables);

/// p_i + sum_k alpha_ik p_k - b_i for stacked p = (p(t_1), ..., p(t_N)).
Vector reduction_residual(const ReductionTables& tables, const Vector& p_points);

/// |a - b| / max(|a|, |b|, 1e-12).
double relative_deviation(Complex a, Complex b);

/// Relative deviations between two minimax solutions. The point controls
/// are compared as one stacked vector; node paths in the sup norm over all
/// nodes, both jump slots included.
struct PathDeviation {
  double u_hat = 0.0;
  double sigma = 0.0;
  double c_hat = 0.0;
  double z_hat = 0.0;
  double p = 0.0;
  double max() const;
};

PathDeviation compare_solutions(const MinimaxSolution& a, const MinimaxSolution& b);

}  // namespace pmx
