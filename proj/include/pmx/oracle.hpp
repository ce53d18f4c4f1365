#pragma once

#include "pmx/estimator.hpp"

#include <memory>
#include <vector>

namespace pmx {

struct CbsResult {
  double bound = 0.0;
  double lhs = 0.0;
  bool holds = false;
  Vector equality_element;
};

/// |(f, g)| <= (Q^{-1} f, f)^{1/2} (Q g, g)^{1/2}; the bound is attained at
/// g = Q^{-1} f / (Q^{-1} f, f)^{1/2}. Throws SingularQ unless Q is Hermitian PD.
CbsResult generalized_cbs(const Matrix& Q, const Vector& f, const Vector& g);

/// Coordinates of a discretized control: point components first, then the
/// node values of every interval part.
struct ControlLayout {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<Eigen::Index> point_dims;
  std::vector<std::size_t> interval_first;
  std::vector<std::size_t> interval_last;
  std::vector<Eigen::Index> interval_dims;

  static ControlLayout of(const PreparedScenario& prep);
  Eigen::Index size() const;  // complex coordinates
  Vector flatten(const ControlVector& u) const;
  ControlVector unflatten(const Vector& x) const;
};

/// I(u) = c + 2 Re(b^H u) + u^H K u over the complex coordinates of the layout.
struct QuadraticModel {
  ControlLayout layout;
  Matrix K;
  Vector b;
  double constant = 0.0;
  bool probed = false;

  /// Real degrees of freedom (interleaved re/im).
  Eigen::Index dimension() const { return 2 * K.rows(); }
  /// Twice the quadratic part in interleaved real coordinates.
  Eigen::MatrixXd hessian() const;
  Eigen::VectorXd gradient_at_zero() const;
  double evaluate(const Vector& u) const;
  double evaluate(const ControlVector& u) const { return evaluate(layout.flatten(u)); }

  /// Inverse of hessian()/gradient_at_zero() (used by the probing path).
  static QuadraticModel from_real(ControlLayout layout, const Eigen::MatrixXd& hessian,
                                  const Eigen::VectorXd& gradient, double constant);
};

enum class ModelAssembly { Auto, Probe, Structured };

/// Probe: polarization of cost() along real basis directions (2d^2 + 3d + 1
/// cost evaluations). Structured: exact assembly from the adjoint Green's
/// functions of the basis controls on the same grid and quadrature. Auto
/// probes up to 16 real coordinates.
QuadraticModel build_quadratic_model(const PreparedScenario& prep, ModelAssembly mode = ModelAssembly::Auto);

struct BruteForceResult {
  ControlVector u_star;
  Vector x_star;
  double I_star = 0.0;
  double rcond = 0.0;
};

/// Throws IllConditionedModel when the reciprocal condition estimate is below 1e-12.
BruteForceResult brute_force_minimize(const QuadraticModel& model);

/// f0 + Q^{-1} B* z(.; u) / nu with nu^2 = int (Q~ z, z) dt, sampled on the
/// grid (post-jump values at t_i). sign = -1 gives the other branch.
/// Throws ZeroSensitivity when nu^2 <= 1e-14.
NodeFunction worst_case_f(const PreparedScenario& prep, const ControlVector& u, double sign = 1.0);

/// Rank-one worst noise: xi_i = eta_p D_i^{-1} u_i / sqrt(S_p) and
/// xi_j(t) = eta_I D_j^{-1}(t) u_j(t) / sqrt(S_I) with unit-variance eta's.
struct WorstCaseNoise {
  std::vector<Vector> point_coeffs;
  std::vector<NodeFunction> interval_coeffs;
  double S_points = 0.0;
  double S_intervals = 0.0;
  double point_trace = 0.0;     // sum_i Sp[D_i R_i]
  double interval_trace = 0.0;  // sum_j int Sp[D_j R_j(t, t)] dt
  /// E|sum_i (xi_i, u_i) + sum_j int (xi_j, u_j) dt|^2 in closed form.
  double variance = 0.0;
};

/// Throws ZeroControl when every slot of u vanishes.
WorstCaseNoise worst_case_noise(const PreparedScenario& prep, const ControlVector& u);

}  // namespace pmx
