#pragma once

#include "pmx/matrix_function.hpp"
#include "pmx/time_grid.hpp"

#include <string>
#include <vector>

namespace pmx {

/// dx/dt = A(t) x + B(t) f(t), T-periodic coefficients.
struct PeriodicSystem {
  double period = 1.0;
  Eigen::Index n = 1;
  Eigen::Index r = 1;
  MatrixFunction A;
  MatrixFunction B;
};

/// y_i = H_i x(t_i) + xi_i.
struct PointObservation {
  double t = 0.0;
  Matrix H;
  Matrix D;
};

/// y_j(t) = H_j(t) x(t) + xi_j(t) on [a, b].
struct IntervalObservation {
  double a = 0.0;
  double b = 0.0;
  MatrixFunction H;
  MatrixFunction D;
};

struct ObservationScheme {
  std::vector<PointObservation> points;
  std::vector<IntervalObservation> intervals;

  Eigen::Index point_dim() const { return points.empty() ? 0 : points.front().H.rows(); }
  Eigen::Index interval_dim() const { return intervals.empty() ? 0 : intervals.front().H.rows(); }
};

/// Ellipsoid on the forcing: int (Q (f - f0), f - f0) dt <= 1.
struct UncertaintySpec {
  MatrixFunction Q;
  MatrixFunction f0;
};

/// l(x) = int (x, l0) dt.
struct FunctionalSpec {
  MatrixFunction l0;
};

struct SolverSettings {
  std::size_t base_steps = 2000;
  double singularity_tol = 1e-10;
};

struct Scenario {
  PeriodicSystem system;
  ObservationScheme scheme;
  UncertaintySpec uncertainty;
  FunctionalSpec functional;
  SolverSettings solver;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Hermitian to 1e-12 relative and Cholesky succeeds.
bool is_hermitian_pd(const Matrix& m);

/// Collects every static well-formedness violation; solvability of the
/// periodic problem is a separate check.
ValidationReport validate_scenario(const Scenario& scenario);

/// Grid whose breakpoints are 0, T, every t_i and every interval endpoint.
TimeGrid build_grid(const Scenario& scenario, std::size_t base_steps);
TimeGrid build_grid(const Scenario& scenario);

}  // namespace pmx
