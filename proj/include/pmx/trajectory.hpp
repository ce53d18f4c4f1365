#pragma once

#include "pmx/node_function.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

namespace pmx {

/// Left-continuous piecewise-smooth path on the grid. The node value at a
/// jump time is the pre-jump value; the post-jump value and the applied jump
/// are stored separately.
class ImpulsiveTrajectory {
 public:
  struct Jump {
    Vector jump;
    Vector post;
  };

  ImpulsiveTrajectory() = default;
  ImpulsiveTrajectory(std::shared_ptr<const TimeGrid> grid, Eigen::Index dim);

  const TimeGrid& grid() const { return *grid_; }
  const std::shared_ptr<const TimeGrid>& grid_ptr() const { return grid_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  const Vector& value(std::size_t node) const { return values_[node]; }
  Vector& value(std::size_t node) { return values_[node]; }
  const std::vector<Vector>& values() const { return values_; }

  void set_jump(std::size_t node, Vector jump, Vector post);
  bool has_jump(std::size_t node) const { return jumps_.count(node) != 0; }
  const std::map<std::size_t, Jump>& jumps() const { return jumps_; }
  /// w(t+0) at a node: post-jump value when a jump is recorded there.
  const Vector& post(std::size_t node) const;
  /// Limit from inside `segment`.
  const Vector& side(std::size_t node, std::size_t segment) const;

  double sup_norm() const;
  /// ||w(T) - w(0)|| / (1 + ||w||_inf).
  double periodicity_residual() const;

  /// Slice of rows [begin, begin + dim) as a new trajectory (jumps included).
  ImpulsiveTrajectory block(Eigen::Index begin, Eigen::Index dim) const;
  NodeFunction as_node_function() const;

  /// CSV: header "t, re(w_1), im(w_1), ..., post_jump"; jump nodes appear
  /// twice, pre-jump first.
  void write_csv(std::ostream& out) const;

 private:
  std::shared_ptr<const TimeGrid> grid_;
  Eigen::Index dim_ = 0;
  std::vector<Vector> values_;
  std::map<std::size_t, Jump> jumps_;
};

}  // namespace pmx
