#include "pmx/estimator.hpp"
#include "pmx/oracle.hpp"
#include "pmx/sim.hpp"
#include "scenarios.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pmx;
using Catch::Approx;

namespace {

// Canonical scenario: z(t; u) = 1 + u g(t), g the unit-jump adjoint solution.
const double e = std::exp(1.0);
const double c0 = std::exp(0.5) / (1.0 - e);
const double G1 = c0 * (std::exp(0.5) - 1.0) + (std::exp(0.5) - 1.0) / (1.0 - e);
const double G2 = c0 * c0 * (e - 1.0) / 2.0 + (e - 1.0) / (2.0 * (1.0 - e) * (1.0 - e));

double g_exact(double t, bool post) {
  return (t < 0.5 || (t == 0.5 && !post)) ? c0 * std::exp(t) : std::exp(t - 0.5) / (1.0 - e);
}

double canonical_cost(Complex u) { return 1.0 + 2.0 * u.real() * G1 + std::norm(u) * (G2 + 1.0); }

ControlVector point_control(Complex u) {
  ControlVector c;
  c.points.push_back(Vector::Constant(1, u));
  return c;
}

ControlVector random_control(const PreparedScenario& prep, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlVector u = zero_control(prep);
  for (auto& v : u.points) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
  }
  // Interval parts are smooth (one harmonic) so they are resolved by the grid.
  const double w = 2.0 * M_PI / prep.system().period;
  for (auto& f : u.intervals) {
    Vector c[3];
    for (auto& v : c) {
      v.resize(f.dim());
      for (Eigen::Index i = 0; i < f.dim(); ++i) v(i) = Complex(normal(rng), normal(rng));
    }
    for (auto k = f.first(); k <= f.last(); ++k) {
      const double t = prep.grid->node(k);
      f.at(k) = c[0] + std::cos(w * t) * c[1] + std::sin(w * t) * c[2];
    }
  }
  return u;
}

double max_jump(const ImpulsiveTrajectory& w) {
  double m = 0.0;
  for (const auto& [node, j] : w.jumps()) m = std::max(m, j.jump.norm());
  return m;
}

ControlVector axpy(const ControlVector& a, double s, const ControlVector& b) {
  ControlVector r = a;
  for (std::size_t i = 0; i < r.points.size(); ++i) r.points[i] += s * b.points[i];
  for (std::size_t j = 0; j < r.intervals.size(); ++j) {
    for (auto k = r.intervals[j].first(); k <= r.intervals[j].last(); ++k) {
      r.intervals[j].at(k) += s * b.intervals[j].at(k);
    }
  }
  return r;
}

ObservationData random_observations(const PreparedScenario& prep, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ObservationData obs;
  for (const auto& p : prep.scheme().points) {
    Vector y(p.H.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = Complex(normal(rng), normal(rng));
    obs.points.push_back(y);
  }
  for (std::size_t j = 0; j < prep.interval_count(); ++j) {
    const auto l = prep.scheme().intervals[j].H.rows();
    NodeFunction y(prep.grid, prep.interval_first[j], prep.interval_last[j], l);
    const Vector a = Vector::Random(l), b = Vector::Random(l);
    const double w = 2.0 * M_PI / prep.system().period;
    for (auto k = y.first(); k <= y.last(); ++k) {
      const double t = prep.grid->node(k);
      y.at(k) = a * std::cos(w * t) + b * std::sin(3 * w * t);
    }
    obs.intervals.push_back(y);
  }
  return obs;
}

Scenario zero_functional(Scenario sc) {
  sc.functional.l0 = MatrixFunction::zero(sc.system.period, sc.system.n, 1);
  return sc;
}

}  // namespace

TEST_CASE("adjoint state examples", "[estimator]") {
  const auto prep = prepare(test::canonical_scalar());
  SECTION("zero control is the plain adjoint equilibrium") {
    const auto z = adjoint_state(prep, zero_control(prep));
    for (const auto& v : z.values()) CHECK(std::abs(v(0) - 1.0) <= 1e-12);
    CHECK(max_jump(z) == 0.0);
  }
  SECTION("zero functional and control") {
    const auto p0 = prepare(zero_functional(test::canonical_scalar()));
    CHECK(adjoint_state(p0, zero_control(p0)).sup_norm() == 0.0);
  }
  SECTION("unit point control matches the piecewise closed form") {
    const auto z = adjoint_state(prep, point_control(1.0));
    const auto mid = prep.point_nodes[0];
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double t = prep.grid->node(k);
      CHECK(std::abs(z.value(k)(0) - (1.0 + g_exact(t, false))) <= 1e-8);
    }
    CHECK(std::abs(z.post(mid)(0) - (1.0 + g_exact(0.5, true))) <= 1e-8);
  }
}

TEST_CASE("cost examples", "[estimator]") {
  SECTION("zero functional, zero control") {
    const auto p0 = prepare(zero_functional(test::canonical_scalar()));
    CHECK(cost(p0, zero_control(p0)) == 0.0);
  }
  const auto prep = prepare(test::canonical_scalar());
  SECTION("zero control") { CHECK(cost(prep, zero_control(prep)) == Approx(1.0).epsilon(1e-12)); }
  SECTION("closed form at several controls") {
    for (const Complex u : {Complex(1.0, 0.0), Complex(-0.3, 0.7), Complex(2.0, -1.5)}) {
      CHECK(cost(prep, point_control(u)) == Approx(canonical_cost(u)).epsilon(1e-8));
    }
  }
  SECTION("cost splits into bias and noise parts") {
    const auto t = cost_terms(prep, point_control(Complex(0.0, 2.0)));
    CHECK(t.noise_points == Approx(4.0));
    CHECK(t.noise_intervals == 0.0);
    CHECK(t.total() == Approx(canonical_cost(Complex(0.0, 2.0))).epsilon(1e-8));
  }
  SECTION("mismatched control") {
    ControlVector bad;
    try {
      cost(prep, bad);
      FAIL("expected ObservationMismatch");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ObservationMismatch);
    }
  }
}

TEST_CASE("offline solution of the canonical scenario", "[estimator]") {
  const auto prep = prepare(test::canonical_scalar());
  const auto sol = solve_offline(prep);
  const double u_exact = -G1 / (G2 + 1.0);
  const double s2_exact = 1.0 - G1 * G1 / (G2 + 1.0);
  CHECK(std::abs(sol.u_hat.points[0](0) - u_exact) <= 1e-8 * u_exact);
  CHECK(sol.sigma * sol.sigma == Approx(s2_exact).epsilon(1e-8));
  // c^ = int z^ = 1 + u^ G1.
  CHECK(std::abs(sol.c_hat - (1.0 + u_exact * G1)) <= 1e-8);
  CHECK(sol.cost_at_optimum == Approx(sol.sigma * sol.sigma).epsilon(1e-8));
  CHECK(std::abs(sol.l_p.imag()) <= 1e-10 * std::abs(sol.l_p));
  CHECK(max_jump(sol.p) <= 1e-12 * (1.0 + sol.p.sup_norm()));
}

TEST_CASE("offline solution with a zero functional", "[estimator]") {
  const auto prep = prepare(zero_functional(test::random_scenario(3, {.base_steps = 400})));
  const auto sol = solve_offline(prep);
  CHECK(sol.sigma == 0.0);
  CHECK(sol.c_hat == Complex(0.0, 0.0));
  CHECK(sol.z_hat.sup_norm() == 0.0);
  CHECK(sol.p.sup_norm() == 0.0);
  CHECK(norm_squared(sol.u_hat) == 0.0);
}

TEST_CASE("offline optimality on random scenarios", "[estimator][property]") {
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const auto prep = prepare(test::random_scenario(seed, {.base_steps = 800}));
    const auto sol = solve_offline(prep);
    INFO("seed " << seed);
    CHECK(sol.cost_at_optimum == Approx(sol.sigma * sol.sigma).epsilon(1e-8));
    CHECK(std::abs(sol.l_p.imag()) <= 1e-10 * std::abs(sol.l_p) + 1e-14);
    CHECK(max_jump(sol.p) <= 1e-12 * (1.0 + sol.p.sup_norm()));
    CHECK(sol.p.periodicity_residual() <= 1e-9);
    CHECK(sol.z_hat.periodicity_residual() <= 1e-9);
    // First-order condition along random directions.
    const double eps = 1e-3;
    for (int d = 0; d < 8; ++d) {
      const ControlVector v = random_control(prep, rng);
      const double slope = (cost(prep, axpy(sol.u_hat, eps, v)) - cost(prep, axpy(sol.u_hat, -eps, v))) / (2 * eps);
      CHECK(std::abs(slope) <= 1e-6 * (1.0 + sol.cost_at_optimum));
    }
  }
}

TEST_CASE("real scenarios give real results", "[estimator][property]") {
  auto sc = test::canonical_scalar(400);
  sc.scheme.points.push_back({0.8, Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.5)});
  std::vector<Harmonic> terms{{1, Matrix::Constant(1, 1, 0.3), Matrix::Constant(1, 1, -0.2)}};
  sc.system.A = sc.system.A + MatrixFunction::fourier(1.0, terms);
  const auto prep = prepare(sc);
  const auto sol = solve_offline(prep);
  CHECK(std::abs(sol.l_p.imag()) <= 1e-10 * std::abs(sol.l_p));
  CHECK(std::abs(sol.c_hat.imag()) <= 1e-10 * std::abs(sol.c_hat));
  ObservationData obs;
  obs.points = {Vector::Constant(1, 0.7), Vector::Constant(1, -1.2)};
  const Complex est = apply_estimator(sol, obs);
  CHECK(std::abs(est.imag()) <= 1e-10 * std::abs(est));
}

TEST_CASE("online solution examples", "[estimator]") {
  SECTION("zero data and zero prior forcing") {
    auto sc = test::canonical_scalar(400);
    sc.uncertainty.f0 = MatrixFunction::zero(1.0, 1, 1);
    const auto prep = prepare(sc);
    ObservationData obs;
    obs.points = {Vector::Zero(1)};
    const auto on = solve_online(prep, obs);
    CHECK(on.p_hat.sup_norm() == 0.0);
    CHECK(on.x_hat.sup_norm() == 0.0);
    CHECK(on.estimate_value == Complex(0.0, 0.0));
  }
  SECTION("exact data generated from f0 is reproduced") {
    for (std::uint64_t seed = 40; seed < 43; ++seed) {
      const auto prep = prepare(test::random_scenario(seed, {.base_steps = 400}));
      const auto x = simulate_truth(prep, prep.scenario.uncertainty.f0);
      const auto obs = make_observations(prep, x, zero_noise(prep));
      const auto on = solve_online(prep, obs);
      double diff = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) diff = std::max(diff, (on.x_hat.value(k) - x.value(k)).norm());
      CHECK(diff <= 1e-7 * (1.0 + x.sup_norm()));
      CHECK(max_jump(on.x_hat) <= 1e-12 * (1.0 + x.sup_norm()));
      CHECK(on.p_hat.sup_norm() <= 1e-7 * (1.0 + x.sup_norm()));
      const Complex lx = functional_value(prep, x);
      CHECK(std::abs(on.estimate_value - lx) <= 1e-7 * (1.0 + std::abs(lx)));
    }
  }
  SECTION("mismatched observations") {
    const auto prep = prepare(test::canonical_scalar(400));
    ObservationData obs;
    obs.points = {Vector::Zero(2)};
    try {
      solve_online(prep, obs);
      FAIL("expected ObservationMismatch");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::ObservationMismatch);
    }
  }
}

TEST_CASE("apply_estimator examples", "[estimator]") {
  const auto prep = prepare(test::canonical_scalar(400));
  MinimaxSolution m;
  m.u_hat = point_control(Complex(2.0, 1.0));
  m.c_hat = 0.0;
  ObservationData zero;
  zero.points = {Vector::Zero(1)};
  CHECK(apply_estimator(m, zero) == Complex(0.0, 0.0));
  m.u_hat = zero_control(prep);
  m.c_hat = Complex(0.3, -0.1);
  ObservationData y;
  y.points = {Vector::Constant(1, Complex(5.0, 2.0))};
  CHECK(apply_estimator(m, y) == Complex(0.3, -0.1));
  // (y, u) = y conj(u).
  m.u_hat = point_control(Complex(0.0, 1.0));
  m.c_hat = 0.0;
  CHECK(std::abs(apply_estimator(m, y) - Complex(2.0, -5.0)) <= 1e-15);
}

TEST_CASE("estimate identity on random data", "[estimator][property]") {
  std::mt19937_64 rng(23);
  for (std::uint64_t seed = 60; seed < 66; ++seed) {
    const auto prep = prepare(test::random_scenario(seed, {.base_steps = 400}));
    const auto sol = solve_offline(prep);
    const auto obs = random_observations(prep, rng);
    const Complex a = apply_estimator(sol, obs);
    const Complex b = solve_online(prep, obs).estimate_value;
    CHECK(std::abs(a - b) <= 1e-7 * std::max(std::abs(a), std::abs(b)));
  }
}

TEST_CASE("worst-case bias grows when c moves away from c^", "[estimator][property]") {
  const auto prep = prepare(test::random_scenario(7, {.base_steps = 400}));
  const auto sol = solve_offline(prep);
  auto worst_bias = [&](Complex shift) {
    double worst = 0.0;
    for (const double sign : {1.0, -1.0}) {
      const auto f = worst_case_f(prep, sol.u_hat, sign);
      const auto x = simulate_truth(prep, f.field());
      const auto y = make_observations(prep, x, zero_noise(prep));
      worst = std::max(worst, std::norm(functional_value(prep, x) - apply_estimator(sol, y) - shift));
    }
    return worst;
  };
  const double at_hat = worst_bias(0.0);
  for (const Complex d : {Complex(0.05, 0.0), Complex(-0.05, 0.0), Complex(0.0, 0.05)}) {
    CHECK(worst_bias(d) > at_hat);
  }
}
