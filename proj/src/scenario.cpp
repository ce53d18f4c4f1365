#include "pmx/scenario.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace pmx {

namespace {

std::string shape(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

void check_shape(ValidationReport& report, const std::string& name, const MatrixFunction& f, Eigen::Index rows,
                 Eigen::Index cols) {
  if (f.empty()) {
    report.violations.push_back(name + " is missing");
  } else if (f.rows() != rows || f.cols() != cols) {
    report.violations.push_back(name + " must be " + shape(rows, cols) + ", got " + shape(f.rows(), f.cols()));
  }
}

void check_periodic(ValidationReport& report, const std::string& name, const MatrixFunction& f, double period) {
  if (f.empty()) return;
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> pick(-2.0 * period, 2.0 * period);
  double worst = 0.0;
  bool deterministic = true;
  for (int s = 0; s < 32; ++s) {
    const double t = pick(rng);
    const Matrix here = f(t);
    if (here != f(t)) deterministic = false;
    const double scale = 1.0 + here.norm();
    worst = std::max(worst, (here - f(t + period)).norm() / scale);
  }
  if (!deterministic) report.violations.push_back(name + " evaluation is not deterministic");
  if (worst > 1e-12) report.violations.push_back(name + " is not T-periodic");
  if (std::abs(f.period() - period) > 1e-14 * period) {
    report.violations.push_back(name + " period differs from system period");
  }
}

}  // namespace

bool is_hermitian_pd(const Matrix& m) {
  if (m.rows() != m.cols() || m.size() == 0) return false;
  if (!m.allFinite()) return false;
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-12 * scale) return false;
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::LLT<Matrix> llt(herm);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixL().toDenseMatrix().diagonal().real().array() > 0.0).all();
}

TimeGrid build_grid(const Scenario& scenario, std::size_t base_steps) {
  std::vector<double> bp;
  for (const auto& p : scenario.scheme.points) bp.push_back(p.t);
  for (const auto& iv : scenario.scheme.intervals) {
    bp.push_back(iv.a);
    bp.push_back(iv.b);
  }
  return build_grid(scenario.system.period, bp, base_steps);
}

TimeGrid build_grid(const Scenario& scenario) { return build_grid(scenario, scenario.solver.base_steps); }

ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport report;
  auto& v = report.violations;
  const auto& sys = sc.system;
  const double T = sys.period;
  bool structural = true;

  if (!(T > 0.0) || !std::isfinite(T)) {
    v.push_back("T must be positive");
    structural = false;
  }
  if (sys.n < 1) {
    v.push_back("n must be at least 1");
    structural = false;
  }
  if (sys.r < 1) {
    v.push_back("r must be at least 1");
    structural = false;
  }
  if (sc.solver.base_steps < 16) {
    v.push_back("solver.base_steps must be at least 16");
    structural = false;
  }
  if (!(sc.solver.singularity_tol > 0.0)) v.push_back("solver.singularity_tol must be positive");
  if (!structural) return report;

  check_shape(report, "A", sys.A, sys.n, sys.n);
  check_shape(report, "B", sys.B, sys.n, sys.r);
  check_shape(report, "Q", sc.uncertainty.Q, sys.r, sys.r);
  check_shape(report, "f0", sc.uncertainty.f0, sys.r, 1);
  check_shape(report, "l0", sc.functional.l0, sys.n, 1);
  check_periodic(report, "A", sys.A, T);
  check_periodic(report, "B", sys.B, T);
  check_periodic(report, "Q", sc.uncertainty.Q, T);
  check_periodic(report, "f0", sc.uncertainty.f0, T);
  check_periodic(report, "l0", sc.functional.l0, T);

  bool times_ok = true;
  const auto m = sc.scheme.point_dim();
  for (std::size_t i = 0; i < sc.scheme.points.size(); ++i) {
    const auto& p = sc.scheme.points[i];
    const auto tag = std::to_string(i + 1);
    if (!(p.t > 0.0 && p.t < T)) {
      v.push_back("t_" + tag + " must lie in open interval (0,T)");
      times_ok = false;
    }
    if (i > 0 && !(p.t > sc.scheme.points[i - 1].t)) {
      v.push_back("t_" + tag + " must be strictly greater than t_" + std::to_string(i));
    }
    if (p.H.rows() != m || p.H.cols() != sys.n) {
      v.push_back("H_" + tag + " must be " + shape(m, sys.n) + ", got " + shape(p.H.rows(), p.H.cols()));
    }
    if (p.D.rows() != m || p.D.cols() != m) {
      v.push_back("D_" + tag + " must be " + shape(m, m));
    } else if (!is_hermitian_pd(p.D)) {
      v.push_back("D_" + tag + " not positive definite");
    }
  }

  const auto l = sc.scheme.interval_dim();
  for (std::size_t j = 0; j < sc.scheme.intervals.size(); ++j) {
    const auto& iv = sc.scheme.intervals[j];
    const auto tag = std::to_string(j + 1);
    if (!(iv.a >= 0.0 && iv.a < iv.b && iv.b <= T)) {
      v.push_back("interval " + tag + " must satisfy 0 <= a < b <= T");
      times_ok = false;
    }
    check_shape(report, "H(interval " + tag + ")", iv.H, l, sys.n);
    check_shape(report, "D(interval " + tag + ")", iv.D, l, l);
    check_periodic(report, "H(interval " + tag + ")", iv.H, T);
    check_periodic(report, "D(interval " + tag + ")", iv.D, T);
  }
  if (!report.ok() || !times_ok) return report;

  // Pointwise PD checks on the solver grid.
  const TimeGrid grid = build_grid(sc);
  for (const double t : grid.nodes()) {
    if (!is_hermitian_pd(sc.uncertainty.Q(t))) {
      v.push_back("Q not positive definite at t=" + std::to_string(t));
      break;
    }
  }
  for (std::size_t j = 0; j < sc.scheme.intervals.size(); ++j) {
    const auto& iv = sc.scheme.intervals[j];
    for (const double t : grid.nodes()) {
      if (t < iv.a || t > iv.b) continue;
      if (!is_hermitian_pd(iv.D(t))) {
        v.push_back("D(interval " + std::to_string(j + 1) + ") not positive definite at t=" + std::to_string(t));
        break;
      }
    }
  }
  return report;
}

}  // namespace pmx
