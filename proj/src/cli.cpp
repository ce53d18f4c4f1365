#include "pmx/cli.hpp"

#include "pmx/algebraic.hpp"
#include "pmx/oracle.hpp"
#include "pmx/periodic_bvp.hpp"
#include "pmx/sim.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace pmx::cli {

namespace {

namespace fs = std::filesystem;

Json cjson(Complex z) { return Json::array({z.real(), z.imag()}); }

Json vjson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(cjson(v(i)));
  return out;
}

/// Non-finite doubles have no JSON literal; they are emitted as null.
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidScenario:
    case ErrorCode::ObservationMismatch:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::HasIntervals:
      return 2;
    case ErrorCode::Parse:
    case ErrorCode::Io:
      return 4;
    default:
      return 3;
  }
}

class Timer {
 public:
  void phase(const std::string& name) {
    stop();
    current_ = name;
    start_ = std::chrono::steady_clock::now();
  }
  void stop() {
    if (current_.empty()) return;
    const auto dt = std::chrono::steady_clock::now() - start_;
    ms_[current_] += std::chrono::duration<double, std::milli>(dt).count();
    current_.clear();
  }
  Json json() {
    stop();
    Json out = Json::object();
    for (const auto& [k, v] : ms_) out[k] = v;
    return out;
  }

 private:
  std::string current_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, double> ms_;
};

struct Common {
  std::string scenario;
  std::string out;
  std::size_t base_steps = 0;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  Timer timer;
  Json settings = Json::object();
};

PreparedScenario load_prepared(const Common& c, Context& ctx, bool check_solvable = true) {
  ctx.timer.phase("load");
  Scenario sc = load_scenario(c.scenario);
  if (c.base_steps) sc.solver.base_steps = c.base_steps;
  ctx.settings["base_steps"] = sc.solver.base_steps;
  ctx.settings["singularity_tol"] = sc.solver.singularity_tol;
  ctx.timer.phase("prepare");
  return check_solvable ? prepare(std::move(sc)) : prepare_unchecked(std::move(sc));
}

void emit(const Common& c, Context& ctx, const std::string& command, Json results) {
  Json report{{"command", command},
              {"scenario_digest", "sha256:" + file_digest(c.scenario)},
              {"solver_settings", ctx.settings},
              {"results", std::move(results)},
              {"timings", ctx.timer.json()}};
  const std::string text = report.dump(2) + "\n";
  if (c.out.empty() || c.out == "-") {
    ctx.out << text;
  } else {
    std::ofstream f(c.out);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + c.out);
    f << text;
  }
}

void write_trajectory(const fs::path& path, const ImpulsiveTrajectory& w) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  w.write_csv(f);
}

Json solution_json(const MinimaxSolution& s) {
  Json u = Json::array();
  for (const auto& v : s.u_hat.points) u.push_back(vjson(v));
  return Json{{"sigma", s.sigma},
              {"c_hat", cjson(s.c_hat)},
              {"u_hat_points", u},
              {"l_p", cjson(s.l_p)},
              {"cost_at_optimum", s.cost_at_optimum}};
}

Json deviation_json(const PathDeviation& d) {
  return Json{{"u_hat", d.u_hat}, {"sigma", d.sigma}, {"c_hat", d.c_hat}, {"z_hat", d.z_hat}, {"p", d.p}};
}

// --- check --------------------------------------------------------------------

int cmd_check(const Common& c, Context& ctx) {
  const PreparedScenario prep = load_prepared(c, ctx, false);
  const auto& r = prep.solvability;
  emit(c, ctx, "check",
       Json{{"s_min", r.s_min},
            {"solvable", r.solvable && r.solvable_adjoint},
            {"s_min_adjoint", r.s_min_adjoint},
            {"cond_monodromy", num(r.cond_monodromy)}});
  if (!(r.solvable && r.solvable_adjoint)) {
    ctx.err << "not solvable: s_min below tolerance (s_min=" << r.s_min << ", tol=" << r.tol << ")\n";
    return 3;
  }
  return 0;
}

// --- solve-periodic -------------------------------------------------------------

int cmd_solve_periodic(const Common& c, Context& ctx, const std::string& forcing_file, const std::string& csv) {
  const PreparedScenario prep = load_prepared(c, ctx);
  const auto& sc = prep.scenario;
  ctx.timer.phase("solve");
  MatrixFunction forcing;
  if (!forcing_file.empty()) {
    const Json j = read_json_file(forcing_file);
    try {
      forcing = vector_function_from_json(j.contains("forcing") ? j.at("forcing") : j, sc.system.period, sc.system.n);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
  }
  VectorField g = forcing_file.empty()
                      ? VectorField([&](double t, std::size_t) -> Vector {
                          return sc.system.B(t) * sc.uncertainty.f0.vector_at(t);
                        })
                      : VectorField([&](double t, std::size_t) -> Vector { return forcing.vector_at(t); });
  const ImpulsiveTrajectory x = solve_periodic_forced(sc.system, g, prep.fund);
  ctx.timer.phase("output");
  if (csv.empty() || csv == "-") {
    x.write_csv(ctx.out);
    return 0;
  }
  write_trajectory(csv, x);
  emit(c, ctx, "solve-periodic",
       Json{{"csv", csv},
            {"nodes", x.size()},
            {"periodicity_residual", x.periodicity_residual()},
            {"l_x", cjson(functional_value(prep, x))}});
  return 0;
}

// --- estimate -------------------------------------------------------------------

int cmd_estimate(const Common& c, Context& ctx, const std::string& method, const std::string& obs_file,
                 const std::string& dump_dir) {
  const PreparedScenario prep = load_prepared(c, ctx);
  ctx.settings["method"] = method;
  std::optional<ObservationData> obs;
  if (!obs_file.empty()) {
    ctx.timer.phase("load");
    obs = observations_from_json(prep, read_json_file(obs_file));
  }

  std::optional<MinimaxSolution> bvp, alg;
  if (method == "bvp" || method == "both") {
    ctx.timer.phase("offline_bvp");
    bvp = solve_offline(prep);
  }
  if (method == "algebraic" || method == "both") {
    ctx.timer.phase("offline_algebraic");
    alg = solve_pointwise(prep);
  }
  const MinimaxSolution& primary = bvp ? *bvp : *alg;

  Json results = solution_json(primary);
  results["method"] = method;
  if (bvp && alg) {
    const PathDeviation d = compare_solutions(*bvp, *alg);
    results["dual_path_max_rel_dev"] = d.max();
    results["dual_path_deviation"] = deviation_json(d);
    results["algebraic"] = solution_json(*alg);
  }

  std::optional<OnlineSolution> online;
  if (obs) {
    ctx.timer.phase("online");
    online = solve_online(prep, *obs);
    const Complex est = apply_estimator(primary, *obs);
    results["estimate"] = cjson(est);
    results["l_xhat"] = cjson(online->estimate_value);
    results["estimate_identity_rel_dev"] = relative_deviation(est, online->estimate_value);
  } else {
    results["estimate"] = nullptr;
    results["l_xhat"] = nullptr;
  }

  if (!dump_dir.empty()) {
    ctx.timer.phase("output");
    fs::create_directories(dump_dir);
    write_trajectory(fs::path(dump_dir) / "zhat.csv", primary.z_hat);
    write_trajectory(fs::path(dump_dir) / "p.csv", primary.p);
    if (online) {
      write_trajectory(fs::path(dump_dir) / "phat.csv", online->p_hat);
      write_trajectory(fs::path(dump_dir) / "xhat.csv", online->x_hat);
    }
  }
  emit(c, ctx, "estimate", std::move(results));
  return 0;
}

// --- simulate -------------------------------------------------------------------

int cmd_simulate(const Common& c, Context& ctx, std::uint64_t seed, bool boundary, double bp, double bi) {
  const PreparedScenario prep = load_prepared(c, ctx);
  ctx.timer.phase("simulate");
  const MatrixFunction f = sample_f_in_G1(prep, derive_seed(seed, 0), boundary);
  const ImpulsiveTrajectory x = simulate_truth(prep, f);
  const NoiseRealization noise = sample_noise(prep, derive_seed(seed, 1), bp, bi);
  ObservationData obs = make_observations(prep, x, noise);
  obs.provenance.forcing = boundary ? "G1 boundary draw" : "G1 interior draw";
  obs.provenance.noise_seed = seed;
  obs.provenance.budget_points = bp;
  obs.provenance.budget_intervals = bi;
  Json j = observations_to_json(obs);
  j["truth"] = Json{{"l_x", cjson(functional_value(prep, x))}, {"g1_membership", g1_membership(prep, f)}};
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty() || c.out == "-") {
    ctx.out << text;
  } else {
    std::ofstream out(c.out);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + c.out);
    out << text;
  }
  return 0;
}

// --- oracle ---------------------------------------------------------------------

Json cbs_battery(std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  auto rv = [&](int d) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex(normal(rng), normal(rng));
    return v;
  };
  int violations = 0;
  double worst_equality = 0.0;
  for (int k = 0; k < draws; ++k) {
    const int d = dim(rng);
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m.col(i) = rv(d);
    const Matrix Q = m * m.adjoint() + 0.1 * Matrix::Identity(d, d);
    const Vector f = rv(d);
    if (!generalized_cbs(Q, f, rv(d)).holds) ++violations;
    const CbsResult probe = generalized_cbs(Q, f, f);
    const CbsResult eq = generalized_cbs(Q, f, probe.equality_element);
    worst_equality = std::max(worst_equality, std::abs(eq.lhs - eq.bound) / eq.bound);
  }
  return Json{{"draws", draws},
              {"violations", violations},
              {"equality_max_rel_dev", worst_equality},
              {"pass", violations == 0 && worst_equality <= 1e-10}};
}

int cmd_oracle(const Common& c, Context& ctx, std::uint64_t seed, int draws) {
  const PreparedScenario prep = load_prepared(c, ctx);
  Json results;

  ctx.timer.phase("cbs");
  const Json cbs = cbs_battery(derive_seed(seed, 7), 1000);
  results["cbs"] = cbs;
  results["cbs_pass"] = cbs["pass"];

  ctx.timer.phase("offline_bvp");
  const MinimaxSolution off = solve_offline(prep);
  ctx.timer.phase("brute_force");
  const QuadraticModel model = build_quadratic_model(prep);
  const BruteForceResult bf = brute_force_minimize(model);
  const double lp = off.l_p.real();
  const double triple = std::max({relative_deviation(lp, off.cost_at_optimum), relative_deviation(lp, bf.I_star),
                                  relative_deviation(off.cost_at_optimum, bf.I_star)});
  results["sigma2"] = Json{{"l_p", lp},
                           {"cost_u_hat", off.cost_at_optimum},
                           {"brute_force_min", bf.I_star},
                           {"model_dimension", model.dimension()},
                           {"model_assembly", model.probed ? "probe" : "structured"},
                           {"max_rel_dev", triple}};

  if (prep.interval_count() == 0) {
    ctx.timer.phase("offline_algebraic");
    const PathDeviation d = compare_solutions(off, solve_pointwise(prep));
    results["dual_path_max_rel_dev"] = d.max();
    results["dual_path_deviation"] = deviation_json(d);
  } else {
    results["dual_path_max_rel_dev"] = nullptr;
  }

  ctx.timer.phase("sandwich");
  double bias2 = 0.0;
  try {
    const NodeFunction fw = worst_case_f(prep, off.u_hat);
    const ImpulsiveTrajectory xw = simulate_truth(prep, fw.field());
    const ObservationData y = make_observations(prep, xw, zero_noise(prep));
    bias2 = std::norm(functional_value(prep, xw) - apply_estimator(off, y));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroSensitivity) throw;
  }
  double noise_var = 0.0;
  try {
    noise_var = worst_case_noise(prep, off.u_hat).variance;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroControl) throw;
  }
  const double sigma2 = off.sigma * off.sigma;
  results["sandwich"] = Json{{"bias_squared", bias2}, {"noise_variance", noise_var}, {"sigma_squared", sigma2}};
  results["sandwich_rel_dev"] = relative_deviation(bias2 + noise_var, sigma2);

  ctx.timer.phase("guarantee");
  int violations = 0;
  double worst_ratio = 0.0;
  for (int r = 0; r < draws; ++r) {
    const MatrixFunction f = sample_f_in_G1(prep, derive_seed(seed, 1000 + static_cast<std::uint64_t>(r)), true);
    const ImpulsiveTrajectory x = simulate_truth(prep, f);
    const ObservationData y = make_observations(prep, x, zero_noise(prep));
    const double e2 = std::norm(functional_value(prep, x) - apply_estimator(off, y));
    if (e2 > sigma2 * (1.0 + 1e-6)) ++violations;
    if (sigma2 > 0.0) worst_ratio = std::max(worst_ratio, e2 / sigma2);
  }
  results["guarantee_draws"] = draws;
  results["guarantee_violations"] = violations;
  results["guarantee_worst_ratio"] = worst_ratio;
  results["sigma"] = off.sigma;
  emit(c, ctx, "oracle", std::move(results));
  return 0;
}

// --- compare --------------------------------------------------------------------

struct Round {
  double err2 = 0.0;
};

int cmd_compare(const Common& c, Context& ctx, int replications, std::uint64_t seed, bool zero_noise_rounds,
                const std::string& truth) {
  const PreparedScenario prep = load_prepared(c, ctx);
  ctx.timer.phase("offline_bvp");
  const MinimaxSolution off = solve_offline(prep);
  Json results{{"sigma", off.sigma}};
  if (replications <= 0) {
    emit(c, ctx, "compare", std::move(results));
    return 0;
  }
  if (truth != "boundary" && truth != "interior" && truth != "f0") {
    throw Error(ErrorCode::InvalidScenario, "--truth must be boundary, interior or f0");
  }

  ctx.timer.phase("replications");
  std::vector<Round> rounds(static_cast<std::size_t>(replications));
  auto one = [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, r);
    const MatrixFunction f =
        truth == "f0" ? prep.scenario.uncertainty.f0 : sample_f_in_G1(prep, derive_seed(s, 0), truth == "boundary");
    const ImpulsiveTrajectory x = simulate_truth(prep, f);
    const NoiseRealization noise = zero_noise_rounds ? zero_noise(prep) : sample_noise(prep, derive_seed(s, 1), 1.0, 1.0);
    const ObservationData y = make_observations(prep, x, noise);
    rounds[r].err2 = std::norm(functional_value(prep, x) - apply_estimator(off, y));
  };
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(replications));
  if (workers <= 1) {
    for (std::size_t r = 0; r < rounds.size(); ++r) one(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < rounds.size(); r += workers) one(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double sum = 0.0;
  double worst = 0.0;
  for (const auto& r : rounds) {
    sum += r.err2;
    worst = std::max(worst, r.err2);
  }
  const double n = static_cast<double>(replications);
  const double mse = sum / n;
  const double rmse = std::sqrt(mse);
  const double slack = 0.05 + 3.0 / std::sqrt(n);
  const double s2 = off.sigma * off.sigma;
  results["replications"] = replications;
  results["rmse"] = rmse;
  results["mse"] = mse;
  results["max_error"] = std::sqrt(worst);
  results["rmse_bound"] = off.sigma * (1.0 + slack);
  results["mse_bound"] = s2 * (1.0 + slack);
  results["guarantee_ok"] = zero_noise_rounds ? worst <= s2 * (1.0 + 1e-6) : mse <= s2 * (1.0 + slack);
  results["zero_noise"] = zero_noise_rounds;
  results["truth"] = truth;
  emit(c, ctx, "compare", std::move(results));
  return 0;
}

}  // namespace

unsigned worker_count() {
  const char* env = std::getenv("PMX_THREADS");
  unsigned n = 0;
  if (env) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guaranteed estimation of linear functionals of periodic ODE solutions", "pmx"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", common.scenario, "Scenario JSON file")->required();
    sub->add_option("--out", common.out, "Write the report here instead of stdout");
    sub->add_option("--base-steps", common.base_steps, "Override solver.base_steps");
  };

  auto* check = app.add_subcommand("check", "Solvability diagnostics");
  add_common(check);

  std::string forcing_file, csv;
  auto* periodic = app.add_subcommand("solve-periodic", "Periodic solution under a forcing (default B f0)");
  add_common(periodic);
  periodic->add_option("--forcing", forcing_file, "JSON file with an n-vector provider");
  periodic->add_option("--csv", csv, "Trajectory CSV path (stdout when omitted)");

  std::string method = "bvp", obs_file, dump_dir;
  auto* estimate = app.add_subcommand("estimate", "Minimax estimator and realized estimate");
  add_common(estimate);
  estimate->add_option("--method", method, "bvp | algebraic | both")
      ->check(CLI::IsMember({"bvp", "algebraic", "both"}));
  estimate->add_option("--observations", obs_file, "Observation JSON file");
  estimate->add_option("--dump-trajectories", dump_dir, "Directory for zhat/p/phat/xhat CSV files");

  std::uint64_t seed = 1;
  bool boundary = false;
  double budget_points = 1.0, budget_intervals = 1.0;
  auto* simulate = app.add_subcommand("simulate", "Synthetic truth and observations");
  add_common(simulate);
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_flag("--boundary", boundary, "Draw the forcing on the boundary of G1");
  simulate->add_option("--budget-points", budget_points, "Point noise trace budget (<= 1)");
  simulate->add_option("--budget-intervals", budget_intervals, "Interval noise trace budget (<= 1)");

  int draws = 100;
  auto* oracle = app.add_subcommand("oracle", "Cross-validation battery");
  add_common(oracle);
  oracle->add_option("--seed", seed, "Random seed");
  oracle->add_option("--draws", draws, "Boundary draws for the guarantee check");

  int replications = 200;
  bool zero_noise_rounds = false;
  std::string truth = "boundary";
  auto* compare = app.add_subcommand("compare", "Monte-Carlo comparison against sigma");
  add_common(compare);
  compare->add_option("--replications", replications, "Number of rounds");
  compare->add_option("--seed", seed, "Random seed");
  compare->add_flag("--zero-noise", zero_noise_rounds, "Exact observations");
  compare->add_option("--truth", truth, "boundary | interior | f0");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx{out, err, Timer{}, Json::object()};
  try {
    if (*check) return cmd_check(common, ctx);
    if (*periodic) return cmd_solve_periodic(common, ctx, forcing_file, csv);
    if (*estimate) return cmd_estimate(common, ctx, method, obs_file, dump_dir);
    if (*simulate) return cmd_simulate(common, ctx, seed, boundary, budget_points, budget_intervals);
    if (*oracle) return cmd_oracle(common, ctx, seed, draws);
    if (*compare) return cmd_compare(common, ctx, replications, seed, zero_noise_rounds, truth);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "Io: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace pmx::cli
