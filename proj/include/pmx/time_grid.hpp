#pragma once

#include "pmx/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace pmx {

/// Piecewise-uniform grid on [0, T].
///
/// Breakpoints are grid nodes exactly. Between consecutive breakpoints the
/// nodes are uniformly spaced with an even number of steps, so every segment
/// splits into Simpson panels of two steps each.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(std::vector<double> breakpoints, std::vector<std::size_t> steps_per_segment);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<std::size_t>& steps_per_segment() const { return steps_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t segment_count() const { return steps_.size(); }
  double period() const { return nodes_.back(); }
  double node(std::size_t k) const { return nodes_[k]; }

  std::size_t segment_first(std::size_t seg) const { return seg_first_[seg]; }
  std::size_t segment_last(std::size_t seg) const { return seg_first_[seg + 1]; }
  double segment_start(std::size_t seg) const { return breakpoints_[seg]; }
  double segment_end(std::size_t seg) const { return breakpoints_[seg + 1]; }
  double segment_step(std::size_t seg) const;

  /// Node index of a breakpoint; nullopt when t is not a breakpoint.
  std::optional<std::size_t> breakpoint_node(double t) const;
  /// Segment containing the step that starts at node k (k < node_count()-1).
  std::size_t segment_of_step(std::size_t k) const { return step_segment_[k]; }
  /// First node of the Simpson panel containing step k.
  std::size_t panel_start_of_step(std::size_t k) const;
  /// Segments fully contained in [a, b] where a and b are breakpoints.
  std::vector<std::size_t> segments_within(double a, double b) const;

  bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_ && steps_ == other.steps_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<std::size_t> steps_;
  std::vector<std::size_t> seg_first_;  // size segments + 1
  std::vector<double> nodes_;
  std::vector<std::size_t> step_segment_;
};

/// Grid over [0, T] with the given interior breakpoints inserted exactly.
/// Each segment gets ceil(base_steps * length / T) steps rounded up to even,
/// at least 2. Coincident breakpoints collapse to one node. Scenario
/// validation separately requires base_steps >= 16.
TimeGrid build_grid(double period, const std::vector<double>& breakpoints, std::size_t base_steps);

/// One-sided node value selector for integrands with jumps at breakpoints:
/// the callback receives (node index, segment) and should return the limit of
/// the integrand from inside that segment.
template <class F>
auto integrate_segments(const TimeGrid& grid, const std::vector<std::size_t>& segments, F&& f) {
  using R = std::decay_t<decltype(f(std::size_t{0}, std::size_t{0}))>;
  std::optional<R> total;
  for (const auto seg : segments) {
    const auto first = grid.segment_first(seg);
    const auto last = grid.segment_last(seg);
    const double h = grid.segment_step(seg);
    R acc = f(first, seg) + f(last, seg);
    for (auto k = first + 1; k < last; ++k) {
      acc += ((k - first) % 2 == 1 ? 4.0 : 2.0) * f(k, seg);
    }
    R part = (h / 3.0) * acc;
    if (total) {
      *total += part;
    } else {
      total = std::move(part);
    }
  }
  return *total;
}

/// Composite Simpson over the whole period.
template <class F>
auto integrate(const TimeGrid& grid, F&& f) {
  std::vector<std::size_t> all(grid.segment_count());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  return integrate_segments(grid, all, std::forward<F>(f));
}

/// Running integral from 0 to every node. Even-offset nodes inside a segment
/// get exact composite Simpson; odd-offset nodes add the three-point rule
/// h/12 (5 f0 + 8 f1 - f2) on the first half of their panel.
template <class F>
auto prefix_integral(const TimeGrid& grid, F&& f) {
  using R = std::decay_t<decltype(f(std::size_t{0}, std::size_t{0}))>;
  std::vector<R> out(grid.node_count());
  R zero = f(0, 0) * 0.0;
  out[0] = zero;
  R acc = zero;
  for (std::size_t seg = 0; seg < grid.segment_count(); ++seg) {
    const auto first = grid.segment_first(seg);
    const auto last = grid.segment_last(seg);
    const double h = grid.segment_step(seg);
    for (auto k = first; k < last; k += 2) {
      R f0 = f(k, seg);
      R f1 = f(k + 1, seg);
      R f2 = f(k + 2, seg);
      out[k + 1] = acc + (h / 12.0) * (5.0 * f0 + 8.0 * f1 - f2);
      acc += (h / 3.0) * (f0 + 4.0 * f1 + f2);
      out[k + 2] = acc;
    }
  }
  return out;
}

/// Simpson weight of every node in the union of the given segments (a node
/// shared by two listed segments accumulates both contributions).
std::vector<double> simpson_weights(const TimeGrid& grid, const std::vector<std::size_t>& segments);

}  // namespace pmx
