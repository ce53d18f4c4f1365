#pragma once

#include "pmx/scenario.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace pmx {

/// Normalized fundamental matrix X(t) of dx/dt = A(t) x on the grid nodes.
struct FundamentalMatrixTable {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<Matrix> X;
  std::vector<Matrix> X_inv;
  std::vector<Complex> det;
  Matrix monodromy;
  /// LU of E - X(T); absent when the periodic problem is not solvable.
  std::optional<Eigen::PartialPivLU<Matrix>> resolvent;
  /// Largest 1-norm condition number of X(t) over the nodes.
  double cond_estimate = 1.0;
};

/// Z(t) = (X*(t))^{-1}, the fundamental matrix of -dz/dt = A* z.
struct AdjointFundamentalTable {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<Matrix> Z;
  Matrix monodromy_adj;
  std::optional<Eigen::PartialPivLU<Matrix>> resolvent_adj;
};

struct SolvabilityReport {
  double s_min = 0.0;
  double s_min_adjoint = 0.0;
  double norm = 0.0;
  double norm_adjoint = 0.0;
  double cond_monodromy = 0.0;
  double tol = 1e-10;
  bool solvable = false;
  bool solvable_adjoint = false;
};

/// RK4 with the segment step; X_inv and det from a per-node LU. The
/// resolvent is stored when s_min(E - X(T)) > tol * (1 + ||X(T)||).
/// Throws IntegrationOverflow when a node norm exceeds 1e150.
FundamentalMatrixTable fundamental_matrix(const PeriodicSystem& system, std::shared_ptr<const TimeGrid> grid,
                                          double tol = 1e-10);

/// Throws SingularFundamental when cond(X(t)) > 1 / tol at some node.
AdjointFundamentalTable adjoint_fundamental(const FundamentalMatrixTable& fund, double tol = 1e-10);

SolvabilityReport solvability_check(const FundamentalMatrixTable& fund, double tol = 1e-10);

/// Smallest singular value and spectral norm of M.
std::pair<double, double> smin_and_norm(const Matrix& m);

}  // namespace pmx
