#include "pmx/sim.hpp"

#include "pmx/periodic_bvp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

namespace pmx {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return splitmix64(base ^ splitmix64(index)); }

ImpulsiveTrajectory simulate_truth(const PreparedScenario& prep, const VectorField& f_tilde) {
  const auto& B = prep.system().B;
  return solve_periodic_forced(prep.system(), [&](double t, std::size_t seg) -> Vector { return B(t) * f_tilde(t, seg); },
                               prep.fund);
}

ImpulsiveTrajectory simulate_truth(const PreparedScenario& prep, const MatrixFunction& f_tilde) {
  return simulate_truth(prep, [&](double t, std::size_t) -> Vector { return f_tilde.vector_at(t); });
}

double g1_membership(const PreparedScenario& prep, const MatrixFunction& f) {
  const TimeGrid& g = *prep.grid;
  const auto& unc = prep.scenario.uncertainty;
  return integrate(g, [&](std::size_t k, std::size_t) {
    const double t = g.node(k);
    const Vector d = f.vector_at(t) - unc.f0.vector_at(t);
    return inner(unc.Q(t) * d, d).real();
  });
}

MatrixFunction sample_f_in_G1(const PreparedScenario& prep, std::uint64_t seed, bool boundary) {
  constexpr int kOrder = 3;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto r = prep.system().r;
  const double T = prep.system().period;
  auto draw = [&](double scale) {
    Matrix m(r, 1);
    for (Eigen::Index i = 0; i < r; ++i) m(i, 0) = Complex(normal(rng), normal(rng)) * scale;
    return m;
  };
  std::vector<Harmonic> terms;
  for (int k = 0; k <= kOrder; ++k) {
    const double scale = 1.0 / (1.0 + k);
    Harmonic h;
    h.k = k;
    h.cos_coeff = draw(scale);
    h.sin_coeff = k == 0 ? Matrix(Matrix::Zero(r, 1)) : draw(scale);
    terms.push_back(std::move(h));
  }
  const double s = boundary ? 1.0 : uniform(rng);
  const MatrixFunction delta = MatrixFunction::fourier(T, std::move(terms));
  const auto& f0 = prep.scenario.uncertainty.f0;
  const TimeGrid& g = *prep.grid;
  const double rho2 = integrate(g, [&](std::size_t k, std::size_t) {
    const double t = g.node(k);
    const Vector d = delta.vector_at(t);
    return inner(prep.scenario.uncertainty.Q(t) * d, d).real();
  });
  if (!(rho2 > 0.0)) return f0;
  return f0 + delta.scaled(s / std::sqrt(rho2));
}

namespace {

Vector circular_gaussian(std::mt19937_64& rng, const Matrix& cov) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  Vector z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = Complex(normal(rng), normal(rng));
  const Eigen::LLT<Matrix> llt(cov);
  return llt.matrixL() * z;
}

void check_budget(const std::vector<double>& w, const char* what) {
  double s = 0.0;
  for (const double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorCode::BudgetExceeded, std::string(what) + " weights must be nonnegative");
    s += x;
  }
  if (s > 1.0 + 1e-12) throw Error(ErrorCode::BudgetExceeded, std::string(what) + " weights sum to " + std::to_string(s));
}

}  // namespace

NoiseRealization zero_noise(const PreparedScenario& prep) {
  NoiseRealization out;
  for (const auto& pt : prep.scheme().points) out.points.push_back(Vector::Zero(pt.H.rows()));
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    out.intervals.emplace_back(prep.grid, prep.interval_first[j], prep.interval_last[j],
                               prep.scheme().intervals[j].H.rows());
  }
  return out;
}

NoiseRealization sample_noise(const PreparedScenario& prep, std::uint64_t seed, const std::vector<double>& point_weights,
                              const std::vector<double>& interval_weights) {
  if (point_weights.size() != prep.point_count() || interval_weights.size() != prep.interval_count()) {
    throw Error(ErrorCode::ObservationMismatch, "one noise weight per observation slot expected");
  }
  check_budget(point_weights, "point");
  check_budget(interval_weights, "interval");
  const TimeGrid& g = *prep.grid;
  std::mt19937_64 rng(seed);
  NoiseRealization out = zero_noise(prep);
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    if (point_weights[i] == 0.0) continue;
    const auto& pt = prep.scheme().points[i];
    const auto m = pt.H.rows();
    const Matrix cov = (point_weights[i] / static_cast<double>(m)) * pt.D.llt().solve(Matrix::Identity(m, m));
    out.points[i] = circular_gaussian(rng, cov);
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    if (interval_weights[j] == 0.0) continue;
    const auto& iv = prep.scheme().intervals[j];
    const auto l = iv.H.rows();
    const double scale = interval_weights[j] / ((iv.b - iv.a) * static_cast<double>(l));
    for (auto k = prep.interval_first[j]; k <= prep.interval_last[j]; ++k) {
      const Matrix cov = scale * iv.D(g.node(k)).llt().solve(Matrix::Identity(l, l));
      out.intervals[j].at(k) = circular_gaussian(rng, cov);
    }
  }
  return out;
}

NoiseRealization sample_noise(const PreparedScenario& prep, std::uint64_t seed, double budget_points,
                              double budget_intervals) {
  const auto np = prep.point_count();
  const auto ni = prep.interval_count();
  std::vector<double> wp(np, np ? budget_points / static_cast<double>(np) : 0.0);
  std::vector<double> wi(ni, ni ? budget_intervals / static_cast<double>(ni) : 0.0);
  if (budget_points > 1.0 + 1e-12 || budget_intervals > 1.0 + 1e-12) {
    throw Error(ErrorCode::BudgetExceeded, "noise budgets are bounded by 1");
  }
  return sample_noise(prep, seed, wp, wi);
}

ObservationData make_observations(const PreparedScenario& prep, const ImpulsiveTrajectory& x_tilde,
                                  const NoiseRealization& noise) {
  const TimeGrid& g = *prep.grid;
  const auto& sc = prep.scenario;
  if (noise.points.size() != prep.point_count() || noise.intervals.size() != prep.interval_count() ||
      x_tilde.dim() != sc.system.n || !(x_tilde.grid() == g)) {
    throw Error(ErrorCode::ObservationMismatch, "truth or noise does not match the scenario");
  }
  ObservationData obs;
  for (std::size_t i = 0; i < prep.point_count(); ++i) {
    const auto& pt = sc.scheme.points[i];
    if (noise.points[i].size() != pt.H.rows()) throw Error(ErrorCode::ObservationMismatch, "point noise dimension");
    obs.points.push_back(pt.H * x_tilde.value(prep.point_nodes[i]) + noise.points[i]);
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto& iv = sc.scheme.intervals[j];
    const auto& xi = noise.intervals[j];
    if (xi.first() != prep.interval_first[j] || xi.last() != prep.interval_last[j] || xi.dim() != iv.H.rows()) {
      throw Error(ErrorCode::ObservationMismatch, "interval noise samples");
    }
    NodeFunction y(prep.grid, prep.interval_first[j], prep.interval_last[j], iv.H.rows());
    for (auto k = y.first(); k <= y.last(); ++k) y.at(k) = iv.H(g.node(k)) * x_tilde.value(k) + xi.at(k);
    obs.intervals.push_back(std::move(y));
  }
  return obs;
}

namespace {

Json explicit_complex(Complex z) { return Json::array({z.real(), z.imag()}); }

Json explicit_vector(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(explicit_complex(v(i)));
  return out;
}

}  // namespace

Json observations_to_json(const ObservationData& obs) {
  Json points = Json::array();
  for (std::size_t i = 0; i < obs.points.size(); ++i) points.push_back(Json{{"i", i}, {"y", explicit_vector(obs.points[i])}});
  Json intervals = Json::array();
  for (std::size_t j = 0; j < obs.intervals.size(); ++j) {
    const auto& y = obs.intervals[j];
    Json ts = Json::array();
    Json ys = Json::array();
    for (auto k = y.first(); k <= y.last(); ++k) {
      ts.push_back(y.grid().node(k));
      ys.push_back(explicit_vector(y.at(k)));
    }
    intervals.push_back(Json{{"j", j}, {"t", ts}, {"y", ys}});
  }
  const auto& p = obs.provenance;
  return Json{{"points", points},
              {"intervals", intervals},
              {"provenance",
               {{"forcing", p.forcing},
                {"noise_seed", p.noise_seed},
                {"budget_points", p.budget_points},
                {"budget_intervals", p.budget_intervals}}}};
}

ObservationData observations_from_json(const PreparedScenario& prep, const Json& j) {
  const TimeGrid& g = *prep.grid;
  const auto& sc = prep.scenario;
  try {
    ObservationData obs;
    obs.points.assign(prep.point_count(), Vector());
    std::vector<bool> seen(prep.point_count(), false);
    for (const auto& p : j.value("points", Json::array())) {
      const auto i = p.at("i").get<std::size_t>();
      if (i >= prep.point_count() || seen[i]) throw Error(ErrorCode::ObservationMismatch, "bad point index " + std::to_string(i));
      seen[i] = true;
      obs.points[i] = vector_from_json(p.at("y"), sc.scheme.points[i].H.rows());
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorCode::ObservationMismatch, "missing point observation");
    }
    std::vector<std::optional<NodeFunction>> ivs(prep.interval_count());
    for (const auto& iv : j.value("intervals", Json::array())) {
      const auto idx = iv.at("j").get<std::size_t>();
      if (idx >= prep.interval_count() || ivs[idx]) {
        throw Error(ErrorCode::ObservationMismatch, "bad interval index " + std::to_string(idx));
      }
      const auto first = prep.interval_first[idx];
      const auto last = prep.interval_last[idx];
      const auto& ts = iv.at("t");
      const auto& ys = iv.at("y");
      if (ts.size() != last - first + 1 || ys.size() != ts.size()) {
        throw Error(ErrorCode::ObservationMismatch, "interval " + std::to_string(idx) + " sample count differs from grid");
      }
      NodeFunction y(prep.grid, first, last, sc.scheme.intervals[idx].H.rows());
      for (auto k = first; k <= last; ++k) {
        const double t = ts[k - first].get<double>();
        if (std::abs(t - g.node(k)) > 1e-12 * g.period()) {
          throw Error(ErrorCode::ObservationMismatch, "interval sample time " + std::to_string(t) + " is not a grid node");
        }
        y.at(k) = vector_from_json(ys[k - first], y.dim());
      }
      ivs[idx] = std::move(y);
    }
    for (auto& y : ivs) {
      if (!y) throw Error(ErrorCode::ObservationMismatch, "missing interval observation");
      obs.intervals.push_back(std::move(*y));
    }
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      obs.provenance.forcing = p.value("forcing", obs.provenance.forcing);
      obs.provenance.noise_seed = p.value("noise_seed", std::uint64_t{0});
      obs.provenance.budget_points = p.value("budget_points", 0.0);
      obs.provenance.budget_intervals = p.value("budget_intervals", 0.0);
    }
    return obs;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw Error(ErrorCode::ObservationMismatch, e.what());
    throw;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace pmx
