#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mlcd/types.hpp"

namespace mlcd {

/// Raised when a cell cannot be split (all points coincide).
class DegenerateSplit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitRule {
  int axis = 0;
  // Left child holds the ceil(s/2) smallest projections (ties broken by
  // point index); all of them satisfy x[axis] <= threshold.
  double threshold = 0.0;
};

/// Axis of maximal sample variance (1/(s-1) convention, lowest axis on ties)
/// and the rank median along it. `points` is d x s.
SplitRule choose_rule(const Eigen::MatrixXd& points);

struct KdNode {
  int id = 0;
  int level = 0;
  int parent = -1;
  int left = -1;
  int right = -1;
  int axis = -1;  // -1 for leaves
  double threshold = 0.0;
  // Range into KdTree::permutation() holding the node's point ids.
  std::size_t begin = 0;
  std::size_t end = 0;

  bool is_leaf() const { return left < 0; }
  std::size_t count() const { return end - begin; }
};

class KdTree {
 public:
  KdTree() = default;
  KdTree(std::vector<KdNode> nodes, std::vector<std::size_t> permutation, std::size_t leaf_size);

  const KdNode& root() const { return nodes_.front(); }
  const KdNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<KdNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int depth() const { return depth_; }
  std::size_t leaf_count() const { return leaf_count_; }
  std::size_t leaf_size() const { return leaf_size_; }
  std::size_t num_points() const { return permutation_.size(); }

  /// Point ids ordered so every node owns a contiguous range.
  const std::vector<std::size_t>& permutation() const { return permutation_; }
  std::span<const std::size_t> points_of(int id) const;

  /// Node ids at level l (0 = root), in id order.
  const std::vector<int>& cells_at_level(int l) const;

 private:
  std::vector<KdNode> nodes_;
  std::vector<std::size_t> permutation_;
  std::vector<std::vector<int>> levels_;
  std::size_t leaf_size_ = 0;
  std::size_t leaf_count_ = 0;
  int depth_ = 0;
};

/// Recursive rank-median split of the columns of `points` (d x N) until each
/// leaf holds at most n0 points. Node ids are assigned in pre-order.
KdTree make_tree(const Eigen::MatrixXd& points, std::size_t n0);

}  // namespace mlcd
