#include "pmx/algebraic.hpp"

#include "pmx/floquet.hpp"

#include <algorithm>
#include <cmath>

namespace pmx {

namespace {

Matrix adjoint_resolvent_part(const PreparedScenario& prep) {
  if (!prep.adj.resolvent_adj) throw Error(ErrorCode::NotSolvable, "E - Z(T) is singular");
  return prep.adj.resolvent_adj->solve(prep.adj.monodromy_adj);
}

Matrix forward_resolvent_part(const PreparedScenario& prep) {
  if (!prep.fund.resolvent) throw Error(ErrorCode::NotSolvable, "E - X(T) is singular");
  return prep.fund.resolvent->solve(prep.fund.monodromy);
}

}  // namespace

Matrix ReductionTables::M(std::size_t i, std::size_t segment, const TimeGrid& grid) const {
  Matrix m = resolvent_part;
  if (grid.segment_first(segment) >= point_nodes[i]) m += Matrix::Identity(m.rows(), m.cols());
  return m;
}

ImpulsiveTrajectory zbar0(const PreparedScenario& prep) {
  const TimeGrid& g = *prep.grid;
  const auto& fund = prep.fund;
  const auto& l0 = prep.scenario.functional.l0;
  const Matrix R = adjoint_resolvent_part(prep);
  // Z^{-1}(s) = X*(s).
  const auto P = prefix_integral(g, [&](std::size_t k, std::size_t) -> Vector {
    return fund.X[k].adjoint() * l0.vector_at(g.node(k));
  });
  const Vector base = R * P.back();
  ImpulsiveTrajectory z(prep.grid, prep.system().n);
  for (std::size_t k = 0; k < g.node_count(); ++k) z.value(k) = -(prep.adj.Z[k] * (base + P[k]));
  return z;
}

ImpulsiveTrajectory zbar_i(const PreparedScenario& prep, std::size_t i, const Vector& u_i) {
  const TimeGrid& g = *prep.grid;
  const auto& pt = prep.scheme().points.at(i);
  const auto node = prep.point_nodes[i];
  const Matrix R = adjoint_resolvent_part(prep);
  const Vector v = prep.fund.X[node].adjoint() * (pt.H.adjoint() * u_i);
  const Vector before = R * v;
  const Vector after = before + v;
  ImpulsiveTrajectory z(prep.grid, prep.system().n);
  for (std::size_t k = 0; k < g.node_count(); ++k) z.value(k) = prep.adj.Z[k] * (k <= node ? before : after);
  const Vector post = prep.adj.Z[node] * after;
  z.set_jump(node, post - z.value(node), post);
  return z;
}

ReductionTables assemble_reduction(const PreparedScenario& prep) {
  if (prep.interval_count() > 0) throw Error(ErrorCode::HasIntervals, "algebraic reduction needs pointwise-only observations");
  const TimeGrid& g = *prep.grid;
  const auto& fund = prep.fund;
  const auto n = prep.system().n;
  const auto N = prep.point_count();

  ReductionTables t;
  t.resolvent_part = adjoint_resolvent_part(prep);
  t.point_nodes = prep.point_nodes;
  t.zbar0 = zbar0(prep);
  const Matrix S = forward_resolvent_part(prep);

  const auto I0 = prefix_integral(g, [&](std::size_t k, std::size_t) -> Vector {
    return fund.X_inv[k] * (prep.qtilde[k] * t.zbar0.value(k));
  });
  const Vector c0_base = S * I0.back();
  t.C0.resize(g.node_count());
  for (std::size_t k = 0; k < g.node_count(); ++k) t.C0[k] = c0_base + I0[k];

  t.Ck.resize(N);
  for (std::size_t kk = 0; kk < N; ++kk) {
    t.Ck[kk] = prefix_integral(g, [&](std::size_t k, std::size_t seg) -> Matrix {
      return fund.X_inv[k] * prep.qtilde[k] * prep.adj.Z[k] * t.M(kk, seg, g);
    });
  }

  t.alpha = Matrix::Zero(N * n, N * n);
  t.b = Vector::Zero(N * n);
  for (std::size_t i = 0; i < N; ++i) {
    const auto ni = prep.point_nodes[i];
    for (std::size_t k = 0; k < N; ++k) {
      const auto& pk = prep.scheme().points[k];
      const auto nk = prep.point_nodes[k];
      const Matrix outer = S * t.Ck[k].back() + t.Ck[k][ni];
      t.alpha.block(i * n, k * n, n, n) = -fund.X[ni] * outer * fund.X[nk].adjoint() * pk.H.adjoint() * pk.D * pk.H;
    }
    t.b.segment(i * n, n) = fund.X[ni] * t.C0[ni];
  }
  return t;
}

Vector reduction_residual(const ReductionTables& tables, const Vector& p_points) {
  return p_points + tables.alpha * p_points - tables.b;
}

MinimaxSolution solve_pointwise(const PreparedScenario& prep) { return solve_pointwise(prep, assemble_reduction(prep)); }

MinimaxSolution solve_pointwise(const PreparedScenario& prep, const ReductionTables& t) {
  const TimeGrid& g = *prep.grid;
  const auto& fund = prep.fund;
  const auto n = prep.system().n;
  const auto N = prep.point_count();

  const Matrix sys = Matrix::Identity(N * n, N * n) + t.alpha;
  Vector pts = Vector::Zero(N * n);
  if (N > 0) {
    const auto [smin, nrm] = smin_and_norm(sys);
    if (!(smin > 1e-12 * nrm)) throw Error(ErrorCode::SingularReduction, "reduced system is singular");
    pts = sys.fullPivLu().solve(t.b);
  }

  MinimaxSolution sol;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& pt = prep.scheme().points[i];
    sol.u_hat.points.push_back(pt.D * pt.H * pts.segment(i * n, n));
  }

  sol.z_hat = t.zbar0;
  for (std::size_t i = 0; i < N; ++i) {
    const ImpulsiveTrajectory zi = zbar_i(prep, i, sol.u_hat.points[i]);
    for (std::size_t k = 0; k < g.node_count(); ++k) sol.z_hat.value(k) += zi.value(k);
  }
  // Post-jump slot at t_i: z^bar(i) switches branch there, the others are continuous.
  for (std::size_t i = 0; i < N; ++i) {
    const auto node = prep.point_nodes[i];
    const auto& pt = prep.scheme().points[i];
    const Vector v = fund.X[node].adjoint() * (pt.H.adjoint() * sol.u_hat.points[i]);
    const Vector post = sol.z_hat.value(node) + prep.adj.Z[node] * v;
    sol.z_hat.set_jump(node, post - sol.z_hat.value(node), post);
  }

  const Matrix S = forward_resolvent_part(prep);
  std::vector<Vector> w(N);
  for (std::size_t k = 0; k < N; ++k) {
    const auto& pk = prep.scheme().points[k];
    w[k] = fund.X[prep.point_nodes[k]].adjoint() * (pk.H.adjoint() * sol.u_hat.points[k]);
  }
  sol.p = ImpulsiveTrajectory(prep.grid, n);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    Vector inner_sum = t.C0[node];
    for (std::size_t k = 0; k < N; ++k) inner_sum += (S * t.Ck[k].back() + t.Ck[k][node]) * w[k];
    sol.p.value(node) = fund.X[node] * inner_sum;
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

double relative_deviation(Complex a, Complex b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

namespace {

double sup(const ImpulsiveTrajectory& w) { return w.sup_norm(); }

double path_deviation(const ImpulsiveTrajectory& a, const ImpulsiveTrajectory& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, (a.value(k) - b.value(k)).norm());
    d = std::max(d, (a.post(k) - b.post(k)).norm());
  }
  return d / std::max({sup(a), sup(b), 1e-12});
}

}  // namespace

double PathDeviation::max() const { return std::max({u_hat, sigma, c_hat, z_hat, p}); }

PathDeviation compare_solutions(const MinimaxSolution& a, const MinimaxSolution& b) {
  PathDeviation d;
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.u_hat.points.size(); ++i) {
    diff += (a.u_hat.points[i] - b.u_hat.points.at(i)).squaredNorm();
    na += a.u_hat.points[i].squaredNorm();
    nb += b.u_hat.points[i].squaredNorm();
  }
  d.u_hat = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  d.sigma = relative_deviation(a.sigma, b.sigma);
  d.c_hat = relative_deviation(a.c_hat, b.c_hat);
  d.z_hat = path_deviation(a.z_hat, b.z_hat);
  d.p = path_deviation(a.p, b.p);
  return d;
}

}  // namespace pmx
