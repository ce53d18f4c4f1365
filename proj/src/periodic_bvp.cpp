#include "pmx/periodic_bvp.hpp"

#include <map>

namespace pmx {

ImpulsiveTrajectory solve_impulsive_bvp(const ImpulsiveLinearBVP& bvp, std::shared_ptr<const TimeGrid> grid,
                                        double tol) {
  const TimeGrid& g = *grid;
  const auto d = bvp.dim;
  const Matrix eye = Matrix::Identity(d, d);

  std::map<std::size_t, const JumpCondition*> jumps;
  for (const auto& j : bvp.jumps) {
    if (j.node == 0 || j.node + 1 >= g.node_count() || !g.breakpoint_node(g.node(j.node))) {
      throw Error(ErrorCode::InvalidScenario, "jump must sit on an interior breakpoint");
    }
    jumps[j.node] = &j;
  }

  auto deriv = [&](double t, std::size_t seg, const Matrix& y) {
    Matrix dy = bvp.generator(t, seg) * y;
    if (bvp.forcing) dy.col(d) += bvp.forcing(t, seg);
    return dy;
  };

  // Y(node) = [Phi | psi] from the start of the node's segment; for a
  // segment-first node this is [E | 0].
  std::vector<Matrix> local(g.node_count());
  Matrix total_phi = eye;
  Vector total_psi = Vector::Zero(d);
  for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
    const double h = g.segment_step(seg);
    Matrix y = Matrix::Zero(d, d + 1);
    y.leftCols(d) = eye;
    for (auto k = g.segment_first(seg); k < g.segment_last(seg); ++k) {
      const double t = g.node(k);
      const Matrix k1 = deriv(t, seg, y);
      const Matrix k2 = deriv(t + 0.5 * h, seg, y + 0.5 * h * k1);
      const Matrix k3 = deriv(t + 0.5 * h, seg, y + 0.5 * h * k2);
      const Matrix k4 = deriv(t + h, seg, y + h * k3);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      local[k + 1] = y;
    }
    const Matrix& ye = local[g.segment_last(seg)];
    total_phi = ye.leftCols(d) * total_phi;
    total_psi = ye.leftCols(d) * total_psi + ye.col(d);
    const auto it = jumps.find(g.segment_last(seg));
    if (it != jumps.end()) {
      const JumpCondition& jc = *it->second;
      if (jc.J.size()) {
        total_phi += jc.J * total_phi;
        total_psi += jc.J * total_psi;
      }
      if (jc.c.size()) total_psi += jc.c;
    }
  }

  const Matrix closure = eye - total_phi;
  const auto [smin, nrm] = smin_and_norm(closure);
  if (!(smin > tol * nrm)) {
    throw Error(ErrorCode::DegenerateBVP, "periodic closure singular: s_min=" + std::to_string(smin));
  }
  const Vector w0 = closure.partialPivLu().solve(total_psi);

  ImpulsiveTrajectory out(grid, d);
  Vector start = w0;
  out.value(0) = w0;
  for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
    for (auto k = g.segment_first(seg) + 1; k <= g.segment_last(seg); ++k) {
      out.value(k) = local[k].leftCols(d) * start + local[k].col(d);
    }
    const auto last = g.segment_last(seg);
    start = out.value(last);
    const auto it = jumps.find(last);
    if (it != jumps.end()) {
      const JumpCondition& jc = *it->second;
      Vector jump = Vector::Zero(d);
      if (jc.J.size()) jump += jc.J * start;
      if (jc.c.size()) jump += jc.c;
      Vector post = start + jump;
      out.set_jump(last, jump, post);
      start = post;
    }
  }
  return out;
}

ImpulsiveTrajectory solve_periodic_forced(const PeriodicSystem& system, const VectorField& forcing,
                                          const FundamentalMatrixTable& fund) {
  if (!fund.resolvent) throw Error(ErrorCode::NotSolvable, "E - X(T) is singular");
  const TimeGrid& g = *fund.grid;
  const auto n = system.n;
  const auto prefix = prefix_integral(g, [&](std::size_t k, std::size_t seg) -> Vector {
    return fund.X_inv[k] * forcing(g.node(k), seg);
  });
  const Vector base = fund.resolvent->solve(fund.monodromy * prefix.back());
  ImpulsiveTrajectory out(fund.grid, n);
  for (std::size_t k = 0; k < g.node_count(); ++k) out.value(k) = fund.X[k] * (base + prefix[k]);
  return out;
}

ImpulsiveTrajectory solve_impulsive_adjoint(const PeriodicSystem& system, const VectorField& g,
                                            const std::vector<std::pair<double, Vector>>& jumps,
                                            const AdjointFundamentalTable& adj, double tol) {
  if (!adj.resolvent_adj) throw Error(ErrorCode::NotSolvable, "E - Z(T) is singular");
  ImpulsiveLinearBVP bvp;
  bvp.dim = system.n;
  bvp.generator = [A = system.A](double t, std::size_t) -> Matrix { return -A(t).adjoint(); };
  if (g) bvp.forcing = [g](double t, std::size_t seg) -> Vector { return -g(t, seg); };
  for (const auto& [t, r] : jumps) {
    const auto node = adj.grid->breakpoint_node(t);
    if (!node) throw Error(ErrorCode::InvalidScenario, "jump time is not a grid breakpoint");
    bvp.jumps.push_back(JumpCondition{*node, Matrix(), r});
  }
  return solve_impulsive_bvp(bvp, adj.grid, tol);
}

}  // namespace pmx
