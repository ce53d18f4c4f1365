#include "pmx/trajectory.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace pmx {

ImpulsiveTrajectory::ImpulsiveTrajectory(std::shared_ptr<const TimeGrid> grid, Eigen::Index dim)
    : grid_(std::move(grid)), dim_(dim), values_(grid_->node_count(), Vector::Zero(dim)) {}

void ImpulsiveTrajectory::set_jump(std::size_t node, Vector jump, Vector post) {
  jumps_[node] = Jump{std::move(jump), std::move(post)};
}

const Vector& ImpulsiveTrajectory::post(std::size_t node) const {
  const auto it = jumps_.find(node);
  return it == jumps_.end() ? values_[node] : it->second.post;
}

const Vector& ImpulsiveTrajectory::side(std::size_t node, std::size_t segment) const {
  return node == grid_->segment_first(segment) ? post(node) : values_[node];
}

double ImpulsiveTrajectory::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, v.norm());
  for (const auto& [node, j] : jumps_) m = std::max(m, j.post.norm());
  return m;
}

double ImpulsiveTrajectory::periodicity_residual() const {
  return (values_.back() - values_.front()).norm() / (1.0 + sup_norm());
}

ImpulsiveTrajectory ImpulsiveTrajectory::block(Eigen::Index begin, Eigen::Index dim) const {
  ImpulsiveTrajectory out(grid_, dim);
  for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] = values_[k].segment(begin, dim);
  for (const auto& [node, j] : jumps_) {
    out.jumps_[node] = Jump{j.jump.segment(begin, dim), j.post.segment(begin, dim)};
  }
  return out;
}

NodeFunction ImpulsiveTrajectory::as_node_function() const {
  NodeFunction f(grid_, 0, values_.size() - 1, dim_);
  for (std::size_t k = 0; k < values_.size(); ++k) f.at(k) = values_[k];
  for (const auto& [node, j] : jumps_) f.set_post(node, j.post);
  return f;
}

void ImpulsiveTrajectory::write_csv(std::ostream& out) const {
  out << "t";
  for (Eigen::Index i = 1; i <= dim_; ++i) out << ", re(w_" << i << "), im(w_" << i << ")";
  out << ", post_jump\n";
  out << std::setprecision(17);
  auto row = [&](double t, const Vector& v, int flag) {
    out << t;
    for (Eigen::Index i = 0; i < dim_; ++i) out << ", " << v(i).real() << ", " << v(i).imag();
    out << ", " << flag << "\n";
  };
  for (std::size_t k = 0; k < values_.size(); ++k) {
    row(grid_->node(k), values_[k], 0);
    const auto it = jumps_.find(k);
    if (it != jumps_.end()) row(grid_->node(k), it->second.post, 1);
  }
}

}  // namespace pmx
