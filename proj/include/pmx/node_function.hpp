#pragma once

#include "pmx/time_grid.hpp"

#include <map>
#include <memory>
#include <vector>

namespace pmx {

/// Vector function sampled on a contiguous range of grid nodes.
///
/// Between nodes the function is the quadratic through the three nodes of the
/// enclosing Simpson panel. With this interpolant, RK4 stage evaluations see
/// exactly the node weights that composite Simpson assigns, which keeps the
/// ODE coupling and the Simpson inner products consistent for rough data.
/// Optional post-jump values at breakpoint nodes give right limits.
class NodeFunction {
 public:
  NodeFunction() = default;
  NodeFunction(std::shared_ptr<const TimeGrid> grid, std::size_t first, std::size_t last, Eigen::Index dim);

  /// Samples a field on every node of [first, last] (segment-side aware).
  static NodeFunction sample(std::shared_ptr<const TimeGrid> grid, std::size_t first, std::size_t last,
                             const VectorField& field);

  std::size_t first() const { return first_; }
  std::size_t last() const { return last_; }
  std::size_t size() const { return values_.size(); }
  Eigen::Index dim() const { return dim_; }
  bool contains(std::size_t node) const { return node >= first_ && node <= last_; }
  const TimeGrid& grid() const { return *grid_; }
  const std::shared_ptr<const TimeGrid>& grid_ptr() const { return grid_; }

  Vector& at(std::size_t node) { return values_[node - first_]; }
  const Vector& at(std::size_t node) const { return values_[node - first_]; }
  void set_post(std::size_t node, Vector value) { post_[node] = std::move(value); }
  /// Limit from inside `segment` at a node bounding or inside that segment.
  const Vector& side(std::size_t node, std::size_t segment) const;

  /// Value at time t inside `segment`.
  Vector operator()(double t, std::size_t segment) const;
  VectorField field() const;

 private:
  std::shared_ptr<const TimeGrid> grid_;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
  Eigen::Index dim_ = 0;
  std::vector<Vector> values_;
  std::map<std::size_t, Vector> post_;
};

}  // namespace pmx
