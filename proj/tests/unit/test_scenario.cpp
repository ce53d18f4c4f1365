#include "pmx/scenario_io.hpp"
#include "scenarios.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace pmx;
using Catch::Approx;

namespace {

bool has_violation(const ValidationReport& r, const std::string& text) {
  for (const auto& v : r.violations) {
    if (v.find(text) != std::string::npos) return true;
  }
  return false;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("constant and fourier providers are periodic and deterministic", "[scenario]") {
  const double T = 1.7;
  const auto c = MatrixFunction::constant(T, mat2(1, 2, 3, 4));
  std::vector<Harmonic> terms{{0, mat2(1, 0, 0, 1), Matrix()}, {3, mat2(0.5, 0, 0, 0), mat2(0, 0.25, 0, 0)}};
  const auto f = MatrixFunction::fourier(T, terms);
  for (const double t : {-3.1, -0.2, 0.0, 0.4, 1.69, 5.3}) {
    CHECK((c(t) - c(t + T)).norm() == 0.0);
    CHECK((f(t) - f(t + T)).norm() <= 1e-14);
    CHECK(f(t) == f(t));
  }
  const double t = 0.3;
  const double w = 2.0 * M_PI * 3.0 * t / T;
  CHECK(f(t)(0, 0).real() == Approx(1.0 + 0.5 * std::cos(w)).epsilon(1e-14));
  CHECK(f(t)(0, 1).real() == Approx(0.25 * std::sin(w)).epsilon(1e-14));
}

TEST_CASE("grid provider interpolates linearly with wraparound", "[scenario]") {
  const auto g = MatrixFunction::grid(2.0, {Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 4.0)});
  CHECK(g(0.5)(0, 0).real() == Approx(2.0));
  CHECK(g(1.0)(0, 0).real() == Approx(4.0));
  CHECK(g(1.5)(0, 0).real() == Approx(2.0));
  CHECK(std::abs(g(1.5)(0, 0) - g(3.5)(0, 0)) <= 1e-14);
  CHECK(std::abs(g(-0.5)(0, 0) - g(1.5)(0, 0)) <= 1e-14);
  CHECK_THROWS_AS(MatrixFunction::grid(1.0, {Matrix::Zero(1, 1)}), Error);
}

TEST_CASE("providers add and scale", "[scenario]") {
  const auto a = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, 2.0));
  const auto b = MatrixFunction::grid(1.0, {Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 1.0)});
  const auto s = (a + b).scaled(Complex(0.0, 1.0));
  CHECK(std::abs(s(0.5)(0, 0) - Complex(0.0, 3.0)) <= 1e-14);
}

TEST_CASE("validation accepts the canonical scenario", "[scenario]") {
  CHECK(validate_scenario(test::canonical_scalar()).ok());
}

TEST_CASE("validation reports each violated invariant", "[scenario]") {
  SECTION("point at t = 0") {
    auto sc = test::canonical_scalar();
    sc.scheme.points[0].t = 0.0;
    CHECK(has_violation(validate_scenario(sc), "t_1 must lie in open interval (0,T)"));
  }
  SECTION("point at t = T") {
    auto sc = test::canonical_scalar();
    sc.scheme.points[0].t = 1.0;
    CHECK(has_violation(validate_scenario(sc), "t_1 must lie in open interval (0,T)"));
  }
  SECTION("indefinite D") {
    auto sc = test::canonical_scalar();
    sc.system.n = 2;
    sc.system.A = MatrixFunction::constant(1.0, -Matrix::Identity(2, 2));
    sc.system.B = MatrixFunction::constant(1.0, Matrix::Constant(2, 1, 1.0));
    sc.functional.l0 = MatrixFunction::constant(1.0, Matrix::Constant(2, 1, 1.0));
    sc.scheme.points[0].H = Matrix::Identity(2, 2);
    sc.scheme.points[0].D = mat2(1, 2, 2, 1);
    CHECK(has_violation(validate_scenario(sc), "D_1 not positive definite"));
  }
  SECTION("non-Hermitian D") {
    auto sc = test::canonical_scalar();
    sc.scheme.points[0].D = Matrix::Constant(1, 1, Complex(1.0, 0.5));
    CHECK(has_violation(validate_scenario(sc), "D_1 not positive definite"));
  }
  SECTION("unordered points") {
    auto sc = test::canonical_scalar();
    sc.scheme.points.push_back(sc.scheme.points[0]);
    sc.scheme.points[1].t = 0.25;
    CHECK(has_violation(validate_scenario(sc), "t_2 must be strictly greater than t_1"));
  }
  SECTION("bad interval") {
    auto sc = test::canonical_scalar();
    IntervalObservation iv;
    iv.a = 0.6;
    iv.b = 0.4;
    iv.H = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, 1.0));
    iv.D = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, 1.0));
    sc.scheme.intervals.push_back(iv);
    CHECK(has_violation(validate_scenario(sc), "interval 1 must satisfy 0 <= a < b <= T"));
  }
  SECTION("interval D indefinite") {
    auto sc = test::canonical_scalar();
    IntervalObservation iv;
    iv.a = 0.2;
    iv.b = 0.4;
    iv.H = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, 1.0));
    iv.D = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, -1.0));
    sc.scheme.intervals.push_back(iv);
    CHECK(has_violation(validate_scenario(sc), "D(interval 1) not positive definite"));
  }
  SECTION("Q indefinite") {
    auto sc = test::canonical_scalar();
    sc.uncertainty.Q = MatrixFunction::constant(1.0, Matrix::Constant(1, 1, -2.0));
    CHECK(has_violation(validate_scenario(sc), "Q not positive definite"));
  }
  SECTION("wrong shapes") {
    auto sc = test::canonical_scalar();
    sc.system.B = MatrixFunction::constant(1.0, Matrix::Constant(2, 1, 1.0));
    CHECK(has_violation(validate_scenario(sc), "B must be 1x1"));
  }
  SECTION("provider period mismatch") {
    auto sc = test::canonical_scalar();
    std::vector<Harmonic> terms{{1, Matrix::Constant(1, 1, 1.0), Matrix()}};
    sc.functional.l0 = MatrixFunction::fourier(0.7, terms);
    CHECK(has_violation(validate_scenario(sc), "l0"));
  }
  SECTION("non-positive period and dimensions") {
    auto sc = test::canonical_scalar();
    sc.system.period = -1.0;
    CHECK(has_violation(validate_scenario(sc), "T must be positive"));
    sc = test::canonical_scalar();
    sc.system.n = 0;
    CHECK(has_violation(validate_scenario(sc), "n must be at least 1"));
  }
  SECTION("base steps too small") {
    auto sc = test::canonical_scalar(8);
    CHECK(has_violation(validate_scenario(sc), "base_steps"));
  }
}

TEST_CASE("build_grid examples", "[scenario][grid]") {
  SECTION("single segment") {
    const auto g = build_grid(1.0, {}, 16);
    REQUIRE(g.node_count() == 17);
    for (std::size_t k = 0; k < 17; ++k) CHECK(g.node(k) == Approx(k / 16.0).margin(1e-15));
  }
  SECTION("one point splits evenly") {
    const auto g = build_grid(1.0, {0.5}, 16);
    REQUIRE(g.segment_count() == 2);
    CHECK(g.steps_per_segment()[0] == 8);
    CHECK(g.steps_per_segment()[1] == 8);
    REQUIRE(g.breakpoint_node(0.5).has_value());
    CHECK(g.node(*g.breakpoint_node(0.5)) == 0.5);
  }
  SECTION("interval breakpoints") {
    const auto g = build_grid(1.0, {0.3, 0.3, 0.7}, 10);
    REQUIRE(g.breakpoints() == std::vector<double>{0.0, 0.3, 0.7, 1.0});
    // ceil(10 * length) rounded up to even: 3 -> 4, 4 -> 4, 3 -> 4.
    CHECK(g.steps_per_segment() == std::vector<std::size_t>{4, 4, 4});
  }
}

TEST_CASE("grid invariants hold for random breakpoints", "[scenario][grid][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double T = 0.5 + 3.0 * u(rng);
    std::vector<double> bp;
    for (int i = 0; i < 5; ++i) bp.push_back(T * u(rng));
    const std::size_t base = 16 + static_cast<std::size_t>(100 * u(rng));
    const auto g = build_grid(T, bp, base);
    CHECK(g.node_count() >= base + 1);
    CHECK(g.node(0) == 0.0);
    CHECK(g.period() == T);
    for (const double b : bp) {
      REQUIRE(g.breakpoint_node(b).has_value());
      CHECK(g.node(*g.breakpoint_node(b)) == b);
    }
    for (std::size_t s = 0; s < g.segment_count(); ++s) {
      CHECK(g.steps_per_segment()[s] % 2 == 0);
      CHECK(g.steps_per_segment()[s] >= 2);
      const double h = g.segment_step(s);
      for (auto k = g.segment_first(s); k < g.segment_last(s); ++k) {
        CHECK(g.node(k + 1) - g.node(k) == Approx(h).epsilon(1e-9));
      }
    }
    // Idempotence: rebuilding from the grid's own breakpoints.
    const std::vector<double> own(g.breakpoints().begin() + 1, g.breakpoints().end() - 1);
    CHECK(build_grid(T, own, base) == g);
  }
}

TEST_CASE("Simpson quadrature and prefix integral", "[scenario][grid]") {
  const auto g = build_grid(2.0, {0.7, 1.1}, 40);
  auto cubic = [&](std::size_t k, std::size_t) { return std::pow(g.node(k), 3) - g.node(k); };
  CHECK(integrate(g, cubic) == Approx(4.0 - 2.0).epsilon(1e-13));
  const auto P = prefix_integral(g, cubic);
  // Exact at panel ends; the half-panel rule is exact for quadratics only.
  for (std::size_t s = 0; s < g.segment_count(); ++s) {
    const double h = g.segment_step(s);
    for (auto k = g.segment_first(s); k <= g.segment_last(s); ++k) {
      const double t = g.node(k);
      const double exact = std::pow(t, 4) / 4.0 - t * t / 2.0;
      if ((k - g.segment_first(s)) % 2 == 0) {
        CHECK(P[k] == Approx(exact).margin(1e-12));
      } else {
        CHECK(std::abs(P[k] - exact) <= h * h * h * h);
      }
    }
  }
  const auto w = simpson_weights(g, {1});
  double len = 0.0;
  for (const double x : w) len += x;
  CHECK(len == Approx(0.4).epsilon(1e-14));
}

TEST_CASE("scenario JSON round-trip", "[scenario][io]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scenario sc = test::random_scenario(seed);
    const Json j = scenario_to_json(sc);
    const Scenario back = scenario_from_json(Json::parse(j.dump()));
    CHECK(scenario_to_json(back) == j);
    for (const double t : {0.0, 0.31 * sc.system.period, 0.77 * sc.system.period}) {
      CHECK((back.system.A(t) - sc.system.A(t)).norm() <= 1e-15 * (1 + sc.system.A(t).norm()));
      CHECK((back.functional.l0(t) - sc.functional.l0(t)).norm() <= 1e-15 * (1 + sc.functional.l0(t).norm()));
    }
  }
}

TEST_CASE("scenario JSON shorthand and errors", "[scenario][io]") {
  const Json j = Json::parse(R"({
    "system": {"T": 1, "n": 1, "r": 1, "A": [[-1]], "B": {"form": "constant", "value": [[[1, 0]]]}},
    "observations": {"points": [{"t": 0.5, "H": [[1]], "D": [[1]]}]},
    "uncertainty": {"Q": [[1]]},
    "functional": {"l0": {"form": "grid", "samples": [[1], [[0, 2]]]}}
  })");
  const Scenario sc = scenario_from_json(j);
  CHECK(sc.system.A(0.2)(0, 0) == Complex(-1.0, 0.0));
  CHECK(sc.uncertainty.f0(0.3).norm() == 0.0);
  CHECK(std::abs(sc.functional.l0(0.25)(0, 0) - Complex(0.5, 1.0)) <= 1e-15);
  CHECK(validate_scenario(sc).ok());

  Json bad = j;
  bad["system"].erase("A");
  try {
    scenario_from_json(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
  }
  bad = j;
  bad["system"]["A"] = Json{{"form", "spline"}};
  CHECK_THROWS_AS(scenario_from_json(bad), Error);
}
