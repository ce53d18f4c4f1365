#include "pmx/time_grid.hpp"

#include <algorithm>
#include <cmath>

namespace pmx {

TimeGrid::TimeGrid(std::vector<double> breakpoints, std::vector<std::size_t> steps_per_segment)
    : breakpoints_(std::move(breakpoints)), steps_(std::move(steps_per_segment)) {
  if (breakpoints_.size() < 2 || steps_.size() + 1 != breakpoints_.size()) {
    throw Error(ErrorCode::InvalidScenario, "time grid needs K+1 breakpoints for K segments");
  }
  seg_first_.push_back(0);
  nodes_.push_back(breakpoints_.front());
  for (std::size_t seg = 0; seg < steps_.size(); ++seg) {
    const double a = breakpoints_[seg];
    const double b = breakpoints_[seg + 1];
    const auto steps = steps_[seg];
    if (!(b > a) || steps < 2 || steps % 2 != 0) {
      throw Error(ErrorCode::InvalidScenario, "time grid segment malformed");
    }
    const double h = (b - a) / static_cast<double>(steps);
    for (std::size_t k = 1; k < steps; ++k) {
      nodes_.push_back(a + static_cast<double>(k) * h);
      step_segment_.push_back(seg);
    }
    nodes_.push_back(b);
    step_segment_.push_back(seg);
    seg_first_.push_back(nodes_.size() - 1);
  }
}

double TimeGrid::segment_step(std::size_t seg) const {
  return (breakpoints_[seg + 1] - breakpoints_[seg]) / static_cast<double>(steps_[seg]);
}

std::optional<std::size_t> TimeGrid::breakpoint_node(double t) const {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.end() || *it != t) return std::nullopt;
  return seg_first_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

std::size_t TimeGrid::panel_start_of_step(std::size_t k) const {
  const auto first = seg_first_[step_segment_[k]];
  return first + 2 * ((k - first) / 2);
}

std::vector<std::size_t> TimeGrid::segments_within(double a, double b) const {
  std::vector<std::size_t> out;
  for (std::size_t seg = 0; seg < steps_.size(); ++seg) {
    if (breakpoints_[seg] >= a && breakpoints_[seg + 1] <= b) out.push_back(seg);
  }
  return out;
}

TimeGrid build_grid(double period, const std::vector<double>& breakpoints, std::size_t base_steps) {
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidScenario, "period must be positive");
  if (base_steps < 2) throw Error(ErrorCode::InvalidScenario, "base_steps must be at least 2");
  std::vector<double> bp{0.0, period};
  for (const double t : breakpoints) {
    if (t < 0.0 || t > period) throw Error(ErrorCode::InvalidScenario, "breakpoint outside [0, T]");
    bp.push_back(t);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  std::vector<std::size_t> steps;
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double share = static_cast<double>(base_steps) * (bp[s + 1] - bp[s]) / period;
    // Guard against 8.000000000001 rounding up to 9.
    auto count = static_cast<std::size_t>(std::ceil(share - 1e-9));
    if (count % 2 != 0) ++count;
    steps.push_back(std::max<std::size_t>(count, 2));
  }
  return TimeGrid(std::move(bp), std::move(steps));
}

std::vector<double> simpson_weights(const TimeGrid& grid, const std::vector<std::size_t>& segments) {
  std::vector<double> w(grid.node_count(), 0.0);
  for (const auto seg : segments) {
    const auto first = grid.segment_first(seg);
    const auto last = grid.segment_last(seg);
    const double h = grid.segment_step(seg);
    w[first] += h / 3.0;
    w[last] += h / 3.0;
    for (auto k = first + 1; k < last; ++k) w[k] += ((k - first) % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  }
  return w;
}

}  // namespace pmx
