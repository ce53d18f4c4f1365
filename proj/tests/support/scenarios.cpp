#include "scenarios.hpp"

#include <algorithm>
#include <random>

namespace pmx::test {

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, Complex(v, 0.0)); }

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Matrix matrix(Eigen::Index rows, Eigen::Index cols, bool complex) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(rng_), complex ? normal(rng_) : 0.0);
    }
    return m;
  }

  Matrix hpd(Eigen::Index dim, bool complex) {
    const Matrix m = matrix(dim, dim, complex);
    return 0.5 * m * m.adjoint() + 0.5 * Matrix::Identity(dim, dim);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

Scenario canonical_scalar(std::size_t base_steps) {
  Scenario sc;
  sc.system.period = 1.0;
  sc.system.n = 1;
  sc.system.r = 1;
  sc.system.A = MatrixFunction::constant(1.0, scalar(-1.0));
  sc.system.B = MatrixFunction::constant(1.0, scalar(1.0));
  sc.scheme.points.push_back({0.5, scalar(1.0), scalar(1.0)});
  sc.uncertainty.Q = MatrixFunction::constant(1.0, scalar(1.0));
  sc.uncertainty.f0 = MatrixFunction::constant(1.0, scalar(1.0));
  sc.functional.l0 = MatrixFunction::constant(1.0, scalar(1.0));
  sc.solver.base_steps = base_steps;
  return sc;
}

Scenario zero_drift() {
  Scenario sc = canonical_scalar();
  sc.system.A = MatrixFunction::constant(1.0, scalar(0.0));
  return sc;
}

Scenario rotation(double period) {
  Scenario sc;
  sc.system.period = period;
  sc.system.n = 2;
  sc.system.r = 2;
  Matrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  sc.system.A = MatrixFunction::constant(period, a);
  sc.system.B = MatrixFunction::constant(period, Matrix::Identity(2, 2));
  Matrix h(1, 2);
  h << 1.0, 0.0;
  sc.scheme.points.push_back({0.3 * period, h, scalar(1.0)});
  sc.uncertainty.Q = MatrixFunction::constant(period, Matrix::Identity(2, 2));
  sc.uncertainty.f0 = MatrixFunction::zero(period, 2, 1);
  Matrix l0(2, 1);
  l0 << 1.0, 0.0;
  sc.functional.l0 = MatrixFunction::constant(period, l0);
  return sc;
}

Scenario random_scenario(std::uint64_t seed, const RandomOptions& opt) {
  Draw d(seed);
  const bool complex = d.coin();
  Scenario sc;
  const double T = d.uniform(0.5, 3.0);
  const auto n = static_cast<Eigen::Index>(d.integer(1, opt.max_n));
  const auto r = static_cast<Eigen::Index>(d.integer(1, static_cast<int>(n)));
  sc.system.period = T;
  sc.system.n = n;
  sc.system.r = r;
  sc.solver.base_steps = opt.base_steps;

  // Shifted so the constant part is stable; the harmonic keeps it time-varying.
  Matrix a0 = 0.6 * d.matrix(n, n, complex);
  Eigen::ComplexEigenSolver<Matrix> eig(a0);
  const double shift = eig.eigenvalues().real().maxCoeff() + d.uniform(0.3, 1.5);
  a0 -= shift * Matrix::Identity(n, n);
  std::vector<Harmonic> a_terms{{0, a0, Matrix::Zero(n, n)}, {1, 0.2 * d.matrix(n, n, complex), 0.2 * d.matrix(n, n, complex)}};
  sc.system.A = MatrixFunction::fourier(T, a_terms);
  sc.system.B = MatrixFunction::constant(T, d.matrix(n, r, complex));

  const Matrix q0 = d.hpd(r, complex);
  std::vector<Harmonic> q_terms{{0, q0, Matrix::Zero(r, r)}, {1, 0.3 * Matrix::Identity(r, r), Matrix::Zero(r, r)}};
  sc.uncertainty.Q = d.coin() ? MatrixFunction::fourier(T, q_terms) : MatrixFunction::constant(T, q0);
  std::vector<Harmonic> f_terms{{0, d.matrix(r, 1, complex), Matrix::Zero(r, 1)},
                                {2, d.matrix(r, 1, complex), d.matrix(r, 1, complex)}};
  sc.uncertainty.f0 = MatrixFunction::fourier(T, f_terms);
  std::vector<Harmonic> l_terms{{0, d.matrix(n, 1, complex), Matrix::Zero(n, 1)},
                                {1, 0.5 * d.matrix(n, 1, complex), 0.5 * d.matrix(n, 1, complex)}};
  sc.functional.l0 = MatrixFunction::fourier(T, l_terms);

  const int min_points = opt.pointwise_only ? 1 : 0;
  int N = d.integer(min_points, opt.max_points);
  const int M = opt.pointwise_only ? 0 : d.integer(N == 0 ? 1 : 0, opt.max_intervals);
  if (N == 0 && M == 0) N = 1;
  const auto m = static_cast<Eigen::Index>(d.integer(1, 2));
  std::vector<double> times;
  while (static_cast<int>(times.size()) < N) {
    const double t = d.uniform(0.05, 0.95) * T;
    if (std::all_of(times.begin(), times.end(), [&](double s) { return std::abs(s - t) > 0.02 * T; })) {
      times.push_back(t);
    }
  }
  std::sort(times.begin(), times.end());
  for (const double t : times) sc.scheme.points.push_back({t, d.matrix(m, n, complex), d.hpd(m, complex)});

  const auto l = static_cast<Eigen::Index>(d.integer(1, 2));
  for (int j = 0; j < M; ++j) {
    const double len = d.uniform(0.05, 0.2) * T;
    const double a = d.uniform(0.0, T - len);
    IntervalObservation iv;
    iv.a = a;
    iv.b = a + len;
    iv.H = MatrixFunction::constant(T, d.matrix(l, n, complex));
    iv.D = MatrixFunction::constant(T, d.hpd(l, complex));
    sc.scheme.intervals.push_back(std::move(iv));
  }
  return sc;
}

}  // namespace pmx::test
