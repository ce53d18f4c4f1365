#include "pmx/problem.hpp"

#include "pmx/trajectory.hpp"

namespace pmx {

Matrix qtilde_at(const Scenario& scenario, double t) {
  const Matrix b = scenario.system.B(t);
  return b * scenario.uncertainty.Q(t).llt().solve(b.adjoint());
}

PreparedScenario prepare_unchecked(Scenario scenario, std::optional<std::size_t> base_steps) {
  if (base_steps) scenario.solver.base_steps = *base_steps;
  const auto report = validate_scenario(scenario);
  if (!report.ok()) {
    std::string msg;
    for (const auto& v : report.violations) msg += (msg.empty() ? "" : "; ") + v;
    throw Error(ErrorCode::InvalidScenario, msg);
  }
  PreparedScenario p;
  p.scenario = std::move(scenario);
  const Scenario& sc = p.scenario;
  p.grid = std::make_shared<const TimeGrid>(build_grid(sc));
  const TimeGrid& g = *p.grid;
  const double tol = sc.solver.singularity_tol;
  p.fund = fundamental_matrix(sc.system, p.grid, tol);
  p.adj = adjoint_fundamental(p.fund, tol);
  p.solvability = solvability_check(p.fund, tol);

  p.qtilde.reserve(g.node_count());
  for (const double t : g.nodes()) p.qtilde.push_back(qtilde_at(sc, t));

  for (const auto& pt : sc.scheme.points) p.point_nodes.push_back(*g.breakpoint_node(pt.t));
  for (const auto& iv : sc.scheme.intervals) {
    p.interval_first.push_back(*g.breakpoint_node(iv.a));
    p.interval_last.push_back(*g.breakpoint_node(iv.b));
    p.interval_segments.push_back(g.segments_within(iv.a, iv.b));
    std::vector<bool> mask(g.segment_count(), false);
    for (const auto s : p.interval_segments.back()) mask[s] = true;
    p.in_interval.push_back(std::move(mask));
  }
  return p;
}

PreparedScenario prepare(Scenario scenario, std::optional<std::size_t> base_steps) {
  PreparedScenario p = prepare_unchecked(std::move(scenario), base_steps);
  if (!p.solvability.solvable || !p.solvability.solvable_adjoint || !p.fund.resolvent || !p.adj.resolvent_adj) {
    throw Error(ErrorCode::NotSolvable, "not solvable: s_min below tolerance (s_min=" +
                                            std::to_string(p.solvability.s_min) + ")");
  }
  return p;
}

Complex functional_value(const PreparedScenario& prep, const ImpulsiveTrajectory& w) {
  const TimeGrid& g = *prep.grid;
  const auto& l0 = prep.scenario.functional.l0;
  return integrate(g, [&](std::size_t k, std::size_t seg) { return inner(w.side(k, seg), l0.vector_at(g.node(k))); });
}

}  // namespace pmx
