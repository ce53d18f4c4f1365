#include "pmx/floquet.hpp"

#include <cmath>

namespace pmx {

namespace {

double norm1(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// ||E - M|| shrinks with s_min when M is close to E, so the threshold is
// scaled by 1 + ||M|| instead.
double shift_scale(const Matrix& monodromy) { return 1.0 + smin_and_norm(monodromy).second; }

}  // namespace

std::pair<double, double> smin_and_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return {s(s.size() - 1), s(0)};
}

FundamentalMatrixTable fundamental_matrix(const PeriodicSystem& system, std::shared_ptr<const TimeGrid> grid,
                                          double tol) {
  const TimeGrid& g = *grid;
  const auto n = system.n;
  FundamentalMatrixTable out;
  out.grid = grid;
  out.X.resize(g.node_count());
  out.X_inv.resize(g.node_count());
  out.det.resize(g.node_count());

  Matrix x = Matrix::Identity(n, n);
  out.X[0] = x;
  for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
    const double h = g.segment_step(seg);
    for (auto k = g.segment_first(seg); k < g.segment_last(seg); ++k) {
      const double t = g.node(k);
      const Matrix a0 = system.A(t);
      const Matrix am = system.A(t + 0.5 * h);
      const Matrix a1 = system.A(t + h);
      const Matrix k1 = a0 * x;
      const Matrix k2 = am * (x + 0.5 * h * k1);
      const Matrix k3 = am * (x + 0.5 * h * k2);
      const Matrix k4 = a1 * (x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!(x.norm() <= 1e150)) {
        throw Error(ErrorCode::IntegrationOverflow, "fundamental matrix exceeds 1e150 at t=" + std::to_string(t + h));
      }
      out.X[k + 1] = x;
    }
  }

  const Matrix eye = Matrix::Identity(n, n);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    Eigen::PartialPivLU<Matrix> lu(out.X[k]);
    out.X_inv[k] = lu.solve(eye);
    out.det[k] = lu.determinant();
    out.cond_estimate = std::max(out.cond_estimate, norm1(out.X[k]) * norm1(out.X_inv[k]));
  }
  out.monodromy = out.X.back();

  const Matrix res = eye - out.monodromy;
  if (smin_and_norm(res).first > tol * shift_scale(out.monodromy)) out.resolvent.emplace(res);
  return out;
}

AdjointFundamentalTable adjoint_fundamental(const FundamentalMatrixTable& fund, double tol) {
  if (!(fund.cond_estimate <= 1.0 / tol)) {
    throw Error(ErrorCode::SingularFundamental, "fundamental matrix numerically singular");
  }
  AdjointFundamentalTable out;
  out.grid = fund.grid;
  out.Z.reserve(fund.X_inv.size());
  for (const auto& xi : fund.X_inv) out.Z.push_back(xi.adjoint());
  out.Z.front() = Matrix::Identity(fund.monodromy.rows(), fund.monodromy.cols());
  out.monodromy_adj = out.Z.back();
  const Matrix res = Matrix::Identity(out.monodromy_adj.rows(), out.monodromy_adj.cols()) - out.monodromy_adj;
  if (smin_and_norm(res).first > tol * shift_scale(out.monodromy_adj)) out.resolvent_adj.emplace(res);
  return out;
}

SolvabilityReport solvability_check(const FundamentalMatrixTable& fund, double tol) {
  SolvabilityReport r;
  r.tol = tol;
  const auto n = fund.monodromy.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix m = eye - fund.monodromy;
  std::tie(r.s_min, r.norm) = smin_and_norm(m);
  r.solvable = r.s_min > tol * shift_scale(fund.monodromy);
  r.cond_monodromy = r.s_min > 0.0 ? r.norm / r.s_min : std::numeric_limits<double>::infinity();
  const Matrix madj = eye - fund.X_inv.back().adjoint();
  std::tie(r.s_min_adjoint, r.norm_adjoint) = smin_and_norm(madj);
  r.solvable_adjoint = r.s_min_adjoint > tol * shift_scale(fund.X_inv.back().adjoint());
  return r;
}

}  // namespace pmx
