#include "pmx/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace pmx {

CbsResult generalized_cbs(const Matrix& Q, const Vector& f, const Vector& g) {
  if (Q.rows() != Q.cols() || !is_hermitian_pd(Q)) throw Error(ErrorCode::SingularQ, "Q must be Hermitian positive definite");
  if (f.size() != Q.rows() || g.size() != Q.rows()) throw Error(ErrorCode::SingularQ, "dimension mismatch");
  const Eigen::LLT<Matrix> llt(Q);
  const Vector qf = llt.solve(f);
  const double a = inner(qf, f).real();
  const double c = inner(Q * g, g).real();
  CbsResult r;
  r.bound = std::sqrt(std::max(a, 0.0)) * std::sqrt(std::max(c, 0.0));
  r.lhs = std::abs(inner(f, g));
  r.holds = r.lhs <= r.bound * (1.0 + 1e-12);
  r.equality_element = a > 0.0 ? Vector(qf / std::sqrt(a)) : Vector(Vector::Zero(f.size()));
  return r;
}

// --- layout -----------------------------------------------------------------

ControlLayout ControlLayout::of(const PreparedScenario& prep) {
  ControlLayout l;
  l.grid = prep.grid;
  for (const auto& pt : prep.scheme().points) l.point_dims.push_back(pt.H.rows());
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    l.interval_first.push_back(prep.interval_first[j]);
    l.interval_last.push_back(prep.interval_last[j]);
    l.interval_dims.push_back(prep.scheme().intervals[j].H.rows());
  }
  return l;
}

Eigen::Index ControlLayout::size() const {
  Eigen::Index s = 0;
  for (const auto d : point_dims) s += d;
  for (std::size_t j = 0; j < interval_dims.size(); ++j) {
    s += static_cast<Eigen::Index>(interval_last[j] - interval_first[j] + 1) * interval_dims[j];
  }
  return s;
}

Vector ControlLayout::flatten(const ControlVector& u) const {
  Vector x(size());
  Eigen::Index o = 0;
  for (std::size_t i = 0; i < point_dims.size(); ++i) {
    x.segment(o, point_dims[i]) = u.points.at(i);
    o += point_dims[i];
  }
  for (std::size_t j = 0; j < interval_dims.size(); ++j) {
    for (auto k = interval_first[j]; k <= interval_last[j]; ++k) {
      x.segment(o, interval_dims[j]) = u.intervals.at(j).at(k);
      o += interval_dims[j];
    }
  }
  return x;
}

ControlVector ControlLayout::unflatten(const Vector& x) const {
  ControlVector u;
  Eigen::Index o = 0;
  for (const auto d : point_dims) {
    u.points.push_back(x.segment(o, d));
    o += d;
  }
  for (std::size_t j = 0; j < interval_dims.size(); ++j) {
    NodeFunction f(grid, interval_first[j], interval_last[j], interval_dims[j]);
    for (auto k = interval_first[j]; k <= interval_last[j]; ++k) {
      f.at(k) = x.segment(o, interval_dims[j]);
      o += interval_dims[j];
    }
    u.intervals.push_back(std::move(f));
  }
  return u;
}

// --- model ------------------------------------------------------------------

Eigen::MatrixXd QuadraticModel::hessian() const {
  const auto d = K.rows();
  Eigen::MatrixXd h(2 * d, 2 * d);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      const double kr = K(p, q).real();
      const double ki = K(p, q).imag();
      h(2 * p, 2 * q) = 2.0 * kr;
      h(2 * p, 2 * q + 1) = -2.0 * ki;
      h(2 * p + 1, 2 * q) = 2.0 * ki;
      h(2 * p + 1, 2 * q + 1) = 2.0 * kr;
    }
  }
  return h;
}

Eigen::VectorXd QuadraticModel::gradient_at_zero() const {
  Eigen::VectorXd g(2 * b.size());
  for (Eigen::Index p = 0; p < b.size(); ++p) {
    g(2 * p) = 2.0 * b(p).real();
    g(2 * p + 1) = 2.0 * b(p).imag();
  }
  return g;
}

double QuadraticModel::evaluate(const Vector& u) const {
  return constant + 2.0 * b.dot(u).real() + u.dot(K * u).real();
}

QuadraticModel QuadraticModel::from_real(ControlLayout layout, const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                         double constant) {
  const auto d = g.size() / 2;
  QuadraticModel m;
  m.layout = std::move(layout);
  m.constant = constant;
  m.K.resize(d, d);
  m.b.resize(d);
  for (Eigen::Index p = 0; p < d; ++p) {
    m.b(p) = Complex(g(2 * p), g(2 * p + 1)) / 2.0;
    for (Eigen::Index q = 0; q < d; ++q) {
      const double kr = (h(2 * p, 2 * q) + h(2 * p + 1, 2 * q + 1)) / 4.0;
      const double ki = (h(2 * p + 1, 2 * q) - h(2 * p, 2 * q + 1)) / 4.0;
      m.K(p, q) = Complex(kr, ki);
    }
  }
  return m;
}

namespace {

QuadraticModel probe_model(const PreparedScenario& prep, const ControlLayout& layout) {
  const auto d = layout.size();
  const auto D = 2 * d;
  auto eval = [&](const Eigen::VectorXd& x) {
    Vector u(d);
    for (Eigen::Index p = 0; p < d; ++p) u(p) = Complex(x(2 * p), x(2 * p + 1));
    return cost(prep, layout.unflatten(u));
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(D);
  const double c = eval(zero);
  Eigen::VectorXd plus(D), minus(D), g(D);
  Eigen::MatrixXd h(D, D);
  for (Eigen::Index k = 0; k < D; ++k) {
    Eigen::VectorXd e = zero;
    e(k) = 1.0;
    plus(k) = eval(e);
    minus(k) = eval(-e);
    g(k) = 0.5 * (plus(k) - minus(k));
    h(k, k) = plus(k) + minus(k) - 2.0 * c;
  }
  for (Eigen::Index k = 0; k < D; ++k) {
    for (Eigen::Index j = k + 1; j < D; ++j) {
      Eigen::VectorXd e = zero;
      e(k) = 1.0;
      e(j) = 1.0;
      const double v = eval(e) - c - g(k) - g(j) - 0.5 * h(k, k) - 0.5 * h(j, j);
      h(k, j) = v;
      h(j, k) = v;
    }
  }
  QuadraticModel m = QuadraticModel::from_real(layout, h, g, c);
  m.probed = true;
  return m;
}

/// One basis control: z_b(s) = Z_s (omega R + pi(s)) v on every quadrature
/// sample s, with pi = 0 before `start`, explicit on [start, end) and omega
/// from `end` on.
struct Basis {
  Vector v;
  double omega = 0.0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<double> partial;

  double pi(std::size_t s) const {
    if (s < start) return 0.0;
    if (s >= end) return omega;
    return partial[s - start];
  }
};

QuadraticModel structured_model(const PreparedScenario& prep, const ControlLayout& layout) {
  const TimeGrid& g = *prep.grid;
  const auto n = prep.system().n;
  const auto& Z = prep.adj.Z;
  const Matrix R = prep.adj.resolvent_adj->solve(prep.adj.monodromy_adj);

  // Quadrature samples (node, segment) in segment order.
  std::vector<std::size_t> s_node, s_seg;
  std::vector<double> s_w;
  std::vector<std::size_t> seg_first_sample(g.segment_count());
  for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
    seg_first_sample[seg] = s_node.size();
    const auto f = g.segment_first(seg);
    const auto l = g.segment_last(seg);
    const double h = g.segment_step(seg);
    for (auto k = f; k <= l; ++k) {
      s_node.push_back(k);
      s_seg.push_back(seg);
      const double c = (k == f || k == l) ? 1.0 : ((k - f) % 2 == 1 ? 4.0 : 2.0);
      s_w.push_back(c * h / 3.0);
    }
  }
  const std::size_t S = s_node.size();

  const ImpulsiveTrajectory z0 = adjoint_state(prep, zero_control(prep));
  std::vector<Matrix> W(S);
  std::vector<Matrix> tail(S + 1, Matrix::Zero(n, n));
  std::vector<Vector> y(S);
  std::vector<Vector> ytail(S + 1, Vector::Zero(n));
  double c = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const auto k = s_node[s];
    W[s] = Z[k].adjoint() * prep.qtilde[k] * Z[k];
    const Vector& zz = z0.side(k, s_seg[s]);
    const Vector qz = prep.qtilde[k] * zz;
    y[s] = s_w[s] * (Z[k].adjoint() * qz);
    c += s_w[s] * inner(qz, zz).real();
  }
  for (std::size_t s = S; s-- > 0;) {
    tail[s] = tail[s + 1] + s_w[s] * W[s];
    ytail[s] = ytail[s + 1] + y[s];
  }

  std::vector<Basis> basis;
  basis.reserve(static_cast<std::size_t>(layout.size()));
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = prep.scheme().points[i];
    const auto node = prep.point_nodes[i];
    std::size_t from = S;
    for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
      if (g.segment_first(seg) == node) {
        from = seg_first_sample[seg];
        break;
      }
    }
    for (Eigen::Index comp = 0; comp < pt.H.rows(); ++comp) {
      Basis b;
      b.v = prep.fund.X[node].adjoint() * pt.H.adjoint().col(comp);
      b.omega = 1.0;
      b.start = b.end = from;
      basis.push_back(std::move(b));
    }
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto& iv = prep.scheme().intervals[j];
    for (auto q = prep.interval_first[j]; q <= prep.interval_last[j]; ++q) {
      // pi(s): prefix quadrature of the node delta at q over the segments of
      // interval j, same rules as prefix_integral.
      std::vector<double> pi(S, 0.0);
      double acc = 0.0;
      for (std::size_t seg = 0; seg < g.segment_count(); ++seg) {
        const auto f = g.segment_first(seg);
        const auto l = g.segment_last(seg);
        const auto s0 = seg_first_sample[seg];
        const bool active = prep.in_interval[j][seg] && q >= f && q <= l;
        const double h = g.segment_step(seg);
        pi[s0] = acc;
        for (auto k = f; k < l; k += 2) {
          const double f0 = active && q == k ? 1.0 : 0.0;
          const double f1 = active && q == k + 1 ? 1.0 : 0.0;
          const double f2 = active && q == k + 2 ? 1.0 : 0.0;
          pi[s0 + (k + 1 - f)] = acc + (h / 12.0) * (5.0 * f0 + 8.0 * f1 - f2);
          acc += (h / 3.0) * (f0 + 4.0 * f1 + f2);
          pi[s0 + (k + 2 - f)] = acc;
        }
      }
      const double omega = pi[S - 1];
      std::size_t start = 0;
      while (start < S && pi[start] == 0.0) ++start;
      std::size_t end = S;
      while (end > 0 && pi[end - 1] == omega) --end;
      end = std::max(end, start);
      const Matrix hq = iv.H(g.node(q));
      for (Eigen::Index comp = 0; comp < hq.rows(); ++comp) {
        Basis b;
        b.v = prep.fund.X[q].adjoint() * hq.adjoint().col(comp);
        b.omega = omega;
        b.start = start;
        b.end = end;
        b.partial.assign(pi.begin() + static_cast<std::ptrdiff_t>(start), pi.begin() + static_cast<std::ptrdiff_t>(end));
        basis.push_back(std::move(b));
      }
    }
  }

  const auto d = static_cast<Eigen::Index>(basis.size());
  Matrix P(n, d), Sig(n, d);
  Vector bvec(d);
  const Vector yall = ytail[0];
  for (Eigen::Index a = 0; a < d; ++a) {
    const Basis& ba = basis[static_cast<std::size_t>(a)];
    P.col(a) = ba.omega * (R * ba.v);
    Vector sig = ba.omega * (tail[std::min(ba.end, S)] * ba.v);
    Vector ysum = ba.omega * ytail[std::min(ba.end, S)];
    for (std::size_t s = ba.start; s < ba.end; ++s) {
      const double p = ba.partial[s - ba.start];
      sig += (p * s_w[s]) * (W[s] * ba.v);
      ysum += p * y[s];
    }
    Sig.col(a) = sig;
    bvec(a) = P.col(a).dot(yall) + ba.v.dot(ysum);
  }
  Matrix K = P.adjoint() * tail[0] * P + P.adjoint() * Sig + Sig.adjoint() * P;
  for (Eigen::Index a = 0; a < d; ++a) {
    const Basis& ba = basis[static_cast<std::size_t>(a)];
    for (Eigen::Index bi = a; bi < d; ++bi) {
      const Basis& bb = basis[static_cast<std::size_t>(bi)];
      const std::size_t e = std::max(ba.end, bb.end);
      Complex tau = 0.0;
      if (e < S) tau += ba.omega * bb.omega * bb.v.dot(tail[e] * ba.v);
      for (std::size_t s = std::max(ba.start, bb.start); s < e; ++s) {
        const double pp = ba.pi(s) * bb.pi(s);
        if (pp != 0.0) tau += (pp * s_w[s]) * bb.v.dot(W[s] * ba.v);
      }
      K(bi, a) += tau;
      if (bi != a) K(a, bi) += std::conj(tau);
    }
  }

  // Noise metric.
  Eigen::Index o = 0;
  for (const auto& pt : prep.scheme().points) {
    const auto m = pt.H.rows();
    K.block(o, o, m, m) += pt.D.llt().solve(Matrix::Identity(m, m));
    o += m;
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto& iv = prep.scheme().intervals[j];
    const auto l = iv.H.rows();
    const auto w = simpson_weights(g, prep.interval_segments[j]);
    for (auto q = prep.interval_first[j]; q <= prep.interval_last[j]; ++q) {
      K.block(o, o, l, l) += w[q] * iv.D(g.node(q)).llt().solve(Matrix::Identity(l, l));
      o += l;
    }
  }

  QuadraticModel model;
  model.layout = layout;
  model.K = std::move(K);
  model.b = std::move(bvec);
  model.constant = c;
  return model;
}

}  // namespace

QuadraticModel build_quadratic_model(const PreparedScenario& prep, ModelAssembly mode) {
  if (!prep.adj.resolvent_adj) throw Error(ErrorCode::NotSolvable, "E - Z(T) is singular");
  const ControlLayout layout = ControlLayout::of(prep);
  if (mode == ModelAssembly::Auto) mode = 2 * layout.size() <= 16 ? ModelAssembly::Probe : ModelAssembly::Structured;
  return mode == ModelAssembly::Probe ? probe_model(prep, layout) : structured_model(prep, layout);
}

BruteForceResult brute_force_minimize(const QuadraticModel& model) {
  BruteForceResult r;
  const auto d = model.K.rows();
  if (d == 0) {
    r.x_star = Vector();
    r.I_star = model.constant;
    r.rcond = 1.0;
    r.u_star = model.layout.unflatten(r.x_star);
    return r;
  }
  const Eigen::LLT<Matrix> llt(model.K);
  r.rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
  if (!(r.rcond >= 1e-12)) throw Error(ErrorCode::IllConditionedModel, "hessian condition estimate exceeds 1e12");
  r.x_star = -llt.solve(model.b);
  r.I_star = model.constant + model.b.dot(r.x_star).real();
  r.u_star = model.layout.unflatten(r.x_star);
  return r;
}

NodeFunction worst_case_f(const PreparedScenario& prep, const ControlVector& u, double sign) {
  const TimeGrid& g = *prep.grid;
  const auto& sc = prep.scenario;
  const ImpulsiveTrajectory z = adjoint_state(prep, u);
  const double nu2 = bias_term(prep, z);
  if (!(nu2 > 1e-14)) throw Error(ErrorCode::ZeroSensitivity, "int (Q~ z, z) dt vanishes; the worst case is f0");
  const double nu = std::sqrt(nu2);
  auto value = [&](std::size_t k, const Vector& zk) -> Vector {
    const double t = g.node(k);
    return sc.uncertainty.f0.vector_at(t) + (sign / nu) * sc.uncertainty.Q(t).llt().solve(sc.system.B(t).adjoint() * zk);
  };
  NodeFunction f(prep.grid, 0, g.node_count() - 1, sc.system.r);
  for (std::size_t k = 0; k < g.node_count(); ++k) f.at(k) = value(k, z.value(k));
  for (const auto& [node, jump] : z.jumps()) f.set_post(node, value(node, jump.post));
  return f;
}

WorstCaseNoise worst_case_noise(const PreparedScenario& prep, const ControlVector& u) {
  const TimeGrid& g = *prep.grid;
  const auto& sc = prep.scenario;
  WorstCaseNoise w;
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    w.S_points += inner(sc.scheme.points[i].D.llt().solve(u.points[i]), u.points[i]).real();
  }
  std::vector<std::vector<double>> weights;
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    weights.push_back(simpson_weights(g, prep.interval_segments[j]));
    const auto& iv = sc.scheme.intervals[j];
    for (auto k = prep.interval_first[j]; k <= prep.interval_last[j]; ++k) {
      const Vector& uk = u.intervals[j].at(k);
      w.S_intervals += weights[j][k] * inner(iv.D(g.node(k)).llt().solve(uk), uk).real();
    }
  }
  if (!(w.S_points > 0.0) && !(w.S_intervals > 0.0)) throw Error(ErrorCode::ZeroControl, "all control slots vanish");

  Complex ep = 0.0;
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = sc.scheme.points[i];
    Vector c = Vector::Zero(u.points[i].size());
    if (w.S_points > 0.0) c = pt.D.llt().solve(u.points[i]) / std::sqrt(w.S_points);
    w.point_trace += inner(pt.D * c, c).real();
    ep += inner(c, u.points[i]);
    w.point_coeffs.push_back(std::move(c));
  }
  Complex ei = 0.0;
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto& iv = sc.scheme.intervals[j];
    NodeFunction c(prep.grid, prep.interval_first[j], prep.interval_last[j], iv.H.rows());
    for (auto k = prep.interval_first[j]; k <= prep.interval_last[j]; ++k) {
      const Matrix dk = iv.D(g.node(k));
      if (w.S_intervals > 0.0) c.at(k) = dk.llt().solve(u.intervals[j].at(k)) / std::sqrt(w.S_intervals);
      w.interval_trace += weights[j][k] * inner(dk * c.at(k), c.at(k)).real();
      ei += weights[j][k] * inner(c.at(k), u.intervals[j].at(k));
    }
    w.interval_coeffs.push_back(std::move(c));
  }
  w.variance = std::norm(ep) + std::norm(ei);
  return w;
}

}  // namespace pmx
