#include "pmx/estimator.hpp"

#include "pmx/periodic_bvp.hpp"

#include <cmath>

namespace pmx {

namespace {

/// sum_j chi_j(seg) H_j*(t) D_j(t) H_j(t).
Matrix interval_gain(const PreparedScenario& prep, double t, std::size_t seg) {
  const auto n = prep.system().n;
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    if (!prep.in_interval[j][seg]) continue;
    const auto& iv = prep.scheme().intervals[j];
    const Matrix h = iv.H(t);
    s += h.adjoint() * iv.D(t) * h;
  }
  return s;
}

/// [[-A*, S], [Q~, A]] for both stacked systems.
MatrixField stacked_generator(const PreparedScenario& prep) {
  return [&prep](double t, std::size_t seg) -> Matrix {
    const auto n = prep.system().n;
    const Matrix a = prep.system().A(t);
    Matrix f(2 * n, 2 * n);
    f.topLeftCorner(n, n) = -a.adjoint();
    f.topRightCorner(n, n) = interval_gain(prep, t, seg);
    f.bottomLeftCorner(n, n) = qtilde_at(prep.scenario, t);
    f.bottomRightCorner(n, n) = a;
    return f;
  };
}

Matrix point_jump(const PointObservation& pt, Eigen::Index n) {
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = pt.H.adjoint() * pt.D * pt.H;
  return j;
}

double interval_quadratic(const PreparedScenario& prep, std::size_t j, const NodeFunction& u) {
  const TimeGrid& g = *prep.grid;
  const auto& iv = prep.scheme().intervals[j];
  return integrate_segments(g, prep.interval_segments[j], [&](std::size_t k, std::size_t seg) {
    const Vector& v = u.side(k, seg);
    return inner(iv.D(g.node(k)).llt().solve(v), v).real();
  });
}

}  // namespace

ControlVector zero_control(const PreparedScenario& prep) {
  ControlVector u;
  for (const auto& pt : prep.scheme().points) u.points.push_back(Vector::Zero(pt.H.rows()));
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    u.intervals.emplace_back(prep.grid, prep.interval_first[j], prep.interval_last[j],
                             prep.scheme().intervals[j].H.rows());
  }
  return u;
}

ImpulsiveTrajectory adjoint_state(const PreparedScenario& prep, const ControlVector& u) {
  const auto& sc = prep.scenario;
  if (u.points.size() != prep.point_count() || u.intervals.size() != prep.interval_count()) {
    throw Error(ErrorCode::ObservationMismatch, "control does not match the observation scheme");
  }
  VectorField g = [&](double t, std::size_t seg) -> Vector {
    Vector v = sc.functional.l0.vector_at(t);
    for (std::size_t j = 0; j < prep.interval_count(); ++j) {
      if (!prep.in_interval[j][seg]) continue;
      v -= sc.scheme.intervals[j].H(t).adjoint() * u.intervals[j](t, seg);
    }
    return v;
  };
  std::vector<std::pair<double, Vector>> jumps;
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = sc.scheme.points[i];
    jumps.emplace_back(pt.t, pt.H.adjoint() * u.points[i]);
  }
  return solve_impulsive_adjoint(sc.system, g, jumps, prep.adj, prep.tol());
}

double bias_term(const PreparedScenario& prep, const ImpulsiveTrajectory& z) {
  return integrate(*prep.grid, [&](std::size_t k, std::size_t seg) {
    const Vector& v = z.side(k, seg);
    return inner(prep.qtilde[k] * v, v).real();
  });
}

CostTerms cost_terms(const PreparedScenario& prep, const ControlVector& u) {
  CostTerms c;
  c.bias = bias_term(prep, adjoint_state(prep, u));
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = prep.scheme().points[i];
    c.noise_points += inner(pt.D.llt().solve(u.points[i]), u.points[i]).real();
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) c.noise_intervals += interval_quadratic(prep, j, u.intervals[j]);
  return c;
}

double cost(const PreparedScenario& prep, const ControlVector& u) { return cost_terms(prep, u).total(); }

Complex c_hat_from(const PreparedScenario& prep, const ImpulsiveTrajectory& z_hat) {
  const TimeGrid& g = *prep.grid;
  const auto& sc = prep.scenario;
  return integrate(g, [&](std::size_t k, std::size_t seg) {
    const double t = g.node(k);
    return inner(sc.uncertainty.f0.vector_at(t), sc.system.B(t).adjoint() * z_hat.side(k, seg));
  });
}

MinimaxSolution solve_offline(const PreparedScenario& prep) {
  const auto& sc = prep.scenario;
  const auto n = sc.system.n;
  const TimeGrid& g = *prep.grid;

  ImpulsiveLinearBVP bvp;
  bvp.dim = 2 * n;
  bvp.generator = stacked_generator(prep);
  bvp.forcing = [&sc, n](double t, std::size_t) -> Vector {
    Vector f = Vector::Zero(2 * n);
    f.head(n) = -sc.functional.l0.vector_at(t);
    return f;
  };
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    bvp.jumps.push_back(JumpCondition{prep.point_nodes[i], point_jump(sc.scheme.points[i], n), Vector()});
  }
  const ImpulsiveTrajectory w = solve_impulsive_bvp(bvp, prep.grid, prep.tol());

  MinimaxSolution sol;
  sol.z_hat = w.block(0, n);
  sol.p = w.block(n, n);
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = sc.scheme.points[i];
    sol.u_hat.points.push_back(pt.D * pt.H * sol.p.value(prep.point_nodes[i]));
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto& iv = sc.scheme.intervals[j];
    NodeFunction uj(prep.grid, prep.interval_first[j], prep.interval_last[j], iv.H.rows());
    for (auto k = uj.first(); k <= uj.last(); ++k) {
      const double t = g.node(k);
      uj.at(k) = iv.D(t) * iv.H(t) * sol.p.value(k);
    }
    sol.u_hat.intervals.push_back(std::move(uj));
  }
  sol.c_hat = c_hat_from(prep, sol.z_hat);
  sol.l_p = functional_value(prep, sol.p);
  if (sol.l_p.real() < -1e-10 * std::abs(sol.l_p)) {
    throw Error(ErrorCode::NumericalInconsistency, "l(p) has negative real part");
  }
  sol.sigma = std::sqrt(std::max(0.0, sol.l_p.real()));
  sol.cost_at_optimum = cost(prep, sol.u_hat);
  return sol;
}

void check_observations(const PreparedScenario& prep, const ObservationData& obs) {
  const auto& sc = prep.scenario;
  if (obs.points.size() != prep.point_count()) {
    throw Error(ErrorCode::ObservationMismatch, "expected " + std::to_string(prep.point_count()) + " point observations");
  }
  for (std::size_t i = 0; i < obs.points.size(); ++i) {
    if (obs.points[i].size() != sc.scheme.points[i].H.rows()) {
      throw Error(ErrorCode::ObservationMismatch, "point observation " + std::to_string(i) + " has wrong dimension");
    }
  }
  if (obs.intervals.size() != prep.interval_count()) {
    throw Error(ErrorCode::ObservationMismatch,
                "expected " + std::to_string(prep.interval_count()) + " interval observations");
  }
  for (std::size_t j = 0; j < obs.intervals.size(); ++j) {
    const auto& y = obs.intervals[j];
    if (!(y.grid() == *prep.grid) || y.first() != prep.interval_first[j] || y.last() != prep.interval_last[j] ||
        y.dim() != sc.scheme.intervals[j].H.rows()) {
      throw Error(ErrorCode::ObservationMismatch, "interval observation " + std::to_string(j) +
                                                      " does not match the grid nodes or dimension");
    }
  }
}

OnlineSolution solve_online(const PreparedScenario& prep, const ObservationData& obs) {
  check_observations(prep, obs);
  const auto& sc = prep.scenario;
  const auto n = sc.system.n;

  ImpulsiveLinearBVP bvp;
  bvp.dim = 2 * n;
  bvp.generator = stacked_generator(prep);
  bvp.forcing = [&prep, &obs, &sc, n](double t, std::size_t seg) -> Vector {
    Vector f = Vector::Zero(2 * n);
    for (std::size_t j = 0; j < prep.interval_count(); ++j) {
      if (!prep.in_interval[j][seg]) continue;
      const auto& iv = sc.scheme.intervals[j];
      const Matrix h = iv.H(t);
      f.head(n) -= h.adjoint() * (iv.D(t) * obs.intervals[j](t, seg));
    }
    f.tail(n) = sc.system.B(t) * sc.uncertainty.f0.vector_at(t);
    return f;
  };
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = sc.scheme.points[i];
    Vector c = Vector::Zero(2 * n);
    c.head(n) = -pt.H.adjoint() * (pt.D * obs.points[i]);
    bvp.jumps.push_back(JumpCondition{prep.point_nodes[i], point_jump(pt, n), std::move(c)});
  }
  const ImpulsiveTrajectory w = solve_impulsive_bvp(bvp, prep.grid, prep.tol());

  OnlineSolution out;
  out.p_hat = w.block(0, n);
  out.x_hat = w.block(n, n);
  out.estimate_value = functional_value(prep, out.x_hat);
  return out;
}

Complex apply_estimator(const MinimaxSolution& minimax, const ObservationData& obs) {
  const auto& u = minimax.u_hat;
  if (obs.points.size() != u.points.size() || obs.intervals.size() != u.intervals.size()) {
    throw Error(ErrorCode::ObservationMismatch, "observation count does not match the estimator");
  }
  Complex s = minimax.c_hat;
  for (std::size_t i = 0; i < u.points.size(); ++i) {
    if (obs.points[i].size() != u.points[i].size()) {
      throw Error(ErrorCode::ObservationMismatch, "point observation " + std::to_string(i) + " has wrong dimension");
    }
    s += inner(obs.points[i], u.points[i]);
  }
  for (std::size_t j = 0; j < u.intervals.size(); ++j) {
    const auto& uj = u.intervals[j];
    const auto& yj = obs.intervals[j];
    if (yj.first() != uj.first() || yj.last() != uj.last() || yj.dim() != uj.dim() || !(yj.grid() == uj.grid())) {
      throw Error(ErrorCode::ObservationMismatch, "interval observation " + std::to_string(j) + " has wrong samples");
    }
    const TimeGrid& g = uj.grid();
    const auto segs = g.segments_within(g.node(uj.first()), g.node(uj.last()));
    s += integrate_segments(g, segs, [&](std::size_t k, std::size_t seg) { return inner(yj.side(k, seg), uj.side(k, seg)); });
  }
  return s;
}

double norm_squared(const ControlVector& u) {
  double s = 0.0;
  for (const auto& v : u.points) s += v.squaredNorm();
  for (const auto& uj : u.intervals) {
    const TimeGrid& g = uj.grid();
    const auto segs = g.segments_within(g.node(uj.first()), g.node(uj.last()));
    s += integrate_segments(g, segs, [&](std::size_t k, std::size_t seg) { return uj.side(k, seg).squaredNorm(); });
  }
  return s;
}

}  // namespace pmx
