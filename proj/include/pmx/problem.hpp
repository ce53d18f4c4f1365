#pragma once

#include "pmx/floquet.hpp"
#include "pmx/trajectory.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace pmx {

/// Scenario plus everything derived from it once: grid, fundamental tables,
/// solvability, Q~(t) at the nodes and the node/segment layout of the
/// observation scheme.
struct PreparedScenario {
  Scenario scenario;
  std::shared_ptr<const TimeGrid> grid;
  FundamentalMatrixTable fund;
  AdjointFundamentalTable adj;
  SolvabilityReport solvability;
  std::vector<Matrix> qtilde;
  std::vector<std::size_t> point_nodes;
  std::vector<std::size_t> interval_first;
  std::vector<std::size_t> interval_last;
  std::vector<std::vector<std::size_t>> interval_segments;
  /// in_interval[j][seg]: segment seg lies inside interval j.
  std::vector<std::vector<bool>> in_interval;

  const PeriodicSystem& system() const { return scenario.system; }
  const ObservationScheme& scheme() const { return scenario.scheme; }
  double tol() const { return scenario.solver.singularity_tol; }
  std::size_t point_count() const { return scenario.scheme.points.size(); }
  std::size_t interval_count() const { return scenario.scheme.intervals.size(); }
};

/// Q~(t) = B(t) Q(t)^{-1} B*(t).
Matrix qtilde_at(const Scenario& scenario, double t);

/// Validates, builds the grid and the fundamental tables. Throws
/// InvalidScenario on validation failure and NotSolvable when E - X(T) or
/// E - Z(T) is numerically singular.
PreparedScenario prepare(Scenario scenario, std::optional<std::size_t> base_steps = std::nullopt);

/// Same as prepare() but keeps unsolvable scenarios (for diagnostics).
PreparedScenario prepare_unchecked(Scenario scenario, std::optional<std::size_t> base_steps = std::nullopt);

/// Linear functional l(w) = int (w, l0) dt with one-sided values at jumps.
Complex functional_value(const PreparedScenario& prep, const ImpulsiveTrajectory& w);

}  // namespace pmx
