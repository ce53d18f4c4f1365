#include "pmx/node_function.hpp"

#include <algorithm>
#include <cmath>

namespace pmx {

NodeFunction::NodeFunction(std::shared_ptr<const TimeGrid> grid, std::size_t first, std::size_t last,
                           Eigen::Index dim)
    : grid_(std::move(grid)), first_(first), last_(last), dim_(dim) {
  if (last < first || last >= grid_->node_count()) throw Error(ErrorCode::ObservationMismatch, "bad node range");
  values_.assign(last - first + 1, Vector::Zero(dim));
}

NodeFunction NodeFunction::sample(std::shared_ptr<const TimeGrid> grid, std::size_t first, std::size_t last,
                                  const VectorField& field) {
  const TimeGrid& g = *grid;
  Vector probe = field(g.node(first), first < g.node_count() - 1 ? g.segment_of_step(first) : g.segment_count() - 1);
  NodeFunction out(grid, first, last, probe.size());
  for (auto k = first; k <= last; ++k) {
    // Left-continuous storage: a node's main value comes from the segment
    // to its left, except node 0.
    const std::size_t seg_left = k == 0 ? 0 : g.segment_of_step(k - 1);
    out.at(k) = field(g.node(k), seg_left);
    if (k > 0 && k < g.node_count() - 1) {
      const std::size_t seg_right = g.segment_of_step(k);
      if (seg_right != seg_left && k > first) {
        Vector right = field(g.node(k), seg_right);
        if (right != out.at(k)) out.set_post(k, std::move(right));
      } else if (seg_right != seg_left && k == first) {
        out.at(k) = field(g.node(k), seg_right);
      }
    }
  }
  return out;
}

const Vector& NodeFunction::side(std::size_t node, std::size_t segment) const {
  if (node == grid_->segment_first(segment)) {
    const auto it = post_.find(node);
    if (it != post_.end()) return it->second;
  }
  return at(node);
}

Vector NodeFunction::operator()(double t, std::size_t segment) const {
  const TimeGrid& g = *grid_;
  const auto s0 = g.segment_first(segment);
  const auto s1 = g.segment_last(segment);
  const double h = g.segment_step(segment);
  const auto steps = static_cast<double>(s1 - s0);
  double q = std::floor((t - g.node(s0)) / h);
  q = std::clamp(q, 0.0, steps - 1.0);
  const auto p0 = s0 + 2 * (static_cast<std::size_t>(q) / 2);
  const double tau = (t - g.node(p0)) / h;
  const double l0 = 0.5 * (tau - 1.0) * (tau - 2.0);
  const double l1 = -tau * (tau - 2.0);
  const double l2 = 0.5 * tau * (tau - 1.0);
  return l0 * side(p0, segment) + l1 * at(p0 + 1) + l2 * at(p0 + 2);
}

VectorField NodeFunction::field() const {
  return [self = *this](double t, std::size_t seg) { return self(t, seg); };
}

}  // namespace pmx
