#pragma once

#include "pmx/floquet.hpp"
#include "pmx/trajectory.hpp"

#include <vector>

namespace pmx {

/// w(t_i + 0) = (E + J) w(t_i) + c at a grid node.
struct JumpCondition {
  std::size_t node = 0;
  Matrix J;  // empty means zero
  Vector c;  // empty means zero
};

/// dw/dt = F(t) w + g(t) on smooth pieces, jumps at nodes, w(0) = w(T).
struct ImpulsiveLinearBVP {
  Eigen::Index dim = 0;
  MatrixField generator;
  VectorField forcing;  // empty means zero
  std::vector<JumpCondition> jumps;
};

/// Segment transition matrices and particular solutions by RK4 on [Phi | psi],
/// composed with the jump factors; the closure (E - Phi) w(0) = psi is one
/// dense solve. Throws DegenerateBVP when s_min(E - Phi) <= tol ||E - Phi||.
ImpulsiveTrajectory solve_impulsive_bvp(const ImpulsiveLinearBVP& bvp, std::shared_ptr<const TimeGrid> grid,
                                        double tol = 1e-10);

/// Periodic solution of dx/dt = A x + forcing via the Cauchy formula with
/// Simpson quadrature against the fundamental matrix table.
ImpulsiveTrajectory solve_periodic_forced(const PeriodicSystem& system, const VectorField& forcing,
                                          const FundamentalMatrixTable& fund);

/// -dz/dt = A* z + g, z(t_i + 0) - z(t_i) = r_i, z(0) = z(T).
ImpulsiveTrajectory solve_impulsive_adjoint(const PeriodicSystem& system, const VectorField& g,
                                            const std::vector<std::pair<double, Vector>>& jumps,
                                            const AdjointFundamentalTable& adj, double tol = 1e-10);

}  // namespace pmx
