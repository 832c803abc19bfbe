#include "mlcd/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

namespace mlcd {

namespace {

int max_variance_axis(const Eigen::MatrixXd& points, std::span<const std::size_t> ids) {
  const Eigen::Index d = points.rows();
  const double s = static_cast<double>(ids.size());
  int best = -1;
  double best_var = 0.0;
  for (Eigen::Index a = 0; a < d; ++a) {
    double mean = 0.0;
    for (std::size_t id : ids) {
      mean += points(a, static_cast<Eigen::Index>(id));
    }
    mean /= s;
    double ss = 0.0;
    for (std::size_t id : ids) {
      const double r = points(a, static_cast<Eigen::Index>(id)) - mean;
      ss += r * r;
    }
    const double var = ss / (s - 1.0);
    if (var > best_var) {
      best_var = var;
      best = static_cast<int>(a);
    }
  }
  if (best < 0) {
    throw DegenerateSplit("kd-tree: all points in the cell coincide");
  }
  return best;
}

// Reorders ids so the first ceil(s/2) entries form the left child.
SplitRule split_in_place(const Eigen::MatrixXd& points, std::span<std::size_t> ids) {
  if (ids.size() < 2) {
    throw DegenerateSplit("kd-tree: need at least two points to split");
  }
  SplitRule rule;
  rule.axis = max_variance_axis(points, ids);
  const auto a = static_cast<Eigen::Index>(rule.axis);
  auto less = [&](std::size_t x, std::size_t y) {
    const double px = points(a, static_cast<Eigen::Index>(x));
    const double py = points(a, static_cast<Eigen::Index>(y));
    return px < py || (px == py && x < y);
  };
  const std::size_t n_left = (ids.size() + 1) / 2;
  std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_left - 1), ids.end(), less);
  const std::size_t pivot = ids[n_left - 1];
  // nth_element leaves [0, n_left-1) unordered but <= pivot.
  rule.threshold = points(a, static_cast<Eigen::Index>(pivot));
  return rule;
}

struct Builder {
  const Eigen::MatrixXd& points;
  std::size_t n0;
  std::vector<KdNode> nodes;
  std::vector<std::size_t> perm;

  int build(std::size_t begin, std::size_t end, int level, int parent) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(KdNode{});
    nodes[id].id = id;
    nodes[id].level = level;
    nodes[id].parent = parent;
    nodes[id].begin = begin;
    nodes[id].end = end;
    if (end - begin <= n0) {
      return id;
    }
    std::span<std::size_t> ids(perm.data() + begin, end - begin);
    SplitRule rule;
    try {
      rule = split_in_place(points, ids);
    } catch (const DegenerateSplit&) {
      return id;
    }
    const std::size_t mid = begin + (end - begin + 1) / 2;
    const int left = build(begin, mid, level + 1, id);
    const int right = build(mid, end, level + 1, id);
    nodes[id].left = left;
    nodes[id].right = right;
    nodes[id].axis = rule.axis;
    nodes[id].threshold = rule.threshold;
    return id;
  }
};

}  // namespace

SplitRule choose_rule(const Eigen::MatrixXd& points) {
  if (points.cols() < 2) {
    throw std::invalid_argument("choose_rule: need at least two points");
  }
  std::vector<std::size_t> ids(static_cast<std::size_t>(points.cols()));
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return split_in_place(points, ids);
}

KdTree::KdTree(std::vector<KdNode> nodes, std::vector<std::size_t> permutation, std::size_t leaf_size)
    : nodes_(std::move(nodes)), permutation_(std::move(permutation)), leaf_size_(leaf_size) {
  if (nodes_.empty()) {
    throw std::invalid_argument("KdTree: no nodes");
  }
  for (const auto& n : nodes_) {
    depth_ = std::max(depth_, n.level);
    if (n.is_leaf()) {
      ++leaf_count_;
    }
  }
  levels_.resize(static_cast<std::size_t>(depth_) + 1);
  for (const auto& n : nodes_) {
    levels_[static_cast<std::size_t>(n.level)].push_back(n.id);
  }
}

std::span<const std::size_t> KdTree::points_of(int id) const {
  const auto& n = node(id);
  return {permutation_.data() + n.begin, n.count()};
}

const std::vector<int>& KdTree::cells_at_level(int l) const {
  if (l < 0 || l > depth_) {
    throw std::invalid_argument("cells_at_level: level " + std::to_string(l) + " outside 0.." +
                                std::to_string(depth_));
  }
  return levels_[static_cast<std::size_t>(l)];
}

KdTree make_tree(const Eigen::MatrixXd& points, std::size_t n0) {
  if (points.cols() == 0) {
    throw std::invalid_argument("make_tree: no points");
  }
  if (n0 < 1) {
    throw std::invalid_argument("make_tree: n0 must be >= 1");
  }
  Builder b{points, n0, {}, {}};
  b.perm.resize(static_cast<std::size_t>(points.cols()));
  std::iota(b.perm.begin(), b.perm.end(), std::size_t{0});
  b.build(0, b.perm.size(), 0, -1);
  // Leaf point lists in ascending id order for stable output.
  for (const auto& n : b.nodes) {
    if (n.is_leaf()) {
      std::sort(b.perm.begin() + static_cast<std::ptrdiff_t>(n.begin),
                b.perm.begin() + static_cast<std::ptrdiff_t>(n.end));
    }
  }
  return KdTree(std::move(b.nodes), std::move(b.perm), n0);
}

}  // namespace mlcd
