#include "mlcd/mlb.hpp"

#include <algorithm>
#include <string>

namespace mlcd {

template <typename Scalar>
MultilevelBasis<Scalar>::MultilevelBasis(KdTree tree, std::vector<LocalFactor<Scalar>> factors,
                                         Eigen::MatrixXd cell_points, Eigen::MatrixXd cell_lo,
                                         Eigen::MatrixXd cell_hi, std::size_t num_modes, double rank_tol)
    : tree_(std::move(tree)),
      factors_(std::move(factors)),
      cell_points_(std::move(cell_points)),
      cell_lo_(std::move(cell_lo)),
      cell_hi_(std::move(cell_hi)),
      num_modes_(num_modes),
      rank_tol_(rank_tol) {
  if (factors_.size() != tree_.size()) {
    throw std::invalid_argument("MultilevelBasis: one factor per tree node is required");
  }
  if (static_cast<std::size_t>(cell_points_.cols()) != tree_.num_points()) {
    throw std::invalid_argument("MultilevelBasis: cell table does not match the tree");
  }
  // Detail registry in (level, node, local) order.
  level_offsets_.assign(static_cast<std::size_t>(levels()) + 1, 0);
  for (int l = 0; l < levels(); ++l) {
    level_offsets_[static_cast<std::size_t>(l)] = details_.size();
    for (int node : tree_.cells_at_level(l)) {
      auto& f = factors_[static_cast<std::size_t>(node)];
      f.detail_offset = details_.size();
      for (int j = 0; j < f.details(); ++j) {
        details_.push_back(DetailKey{l, node, j});
      }
    }
  }
  level_offsets_.back() = details_.size();
  if (root_dim() + details_.size() != size()) {
    throw std::logic_error("MultilevelBasis: dimension count does not add up to N");
  }
  // Node bounding boxes, children before parents.
  const Eigen::Index d = cell_points_.rows();
  node_lo_.resize(d, static_cast<Eigen::Index>(tree_.size()));
  node_hi_.resize(d, static_cast<Eigen::Index>(tree_.size()));
  for (int id = static_cast<int>(tree_.size()) - 1; id >= 0; --id) {
    const auto& n = tree_.node(id);
    if (n.is_leaf()) {
      auto cells = tree_.points_of(id);
      Eigen::VectorXd lo = cell_lo_.col(static_cast<Eigen::Index>(cells[0]));
      Eigen::VectorXd hi = cell_hi_.col(static_cast<Eigen::Index>(cells[0]));
      for (std::size_t c : cells) {
        lo = lo.cwiseMin(cell_lo_.col(static_cast<Eigen::Index>(c)));
        hi = hi.cwiseMax(cell_hi_.col(static_cast<Eigen::Index>(c)));
      }
      node_lo_.col(id) = lo;
      node_hi_.col(id) = hi;
    } else {
      node_lo_.col(id) = node_lo_.col(n.left).cwiseMin(node_lo_.col(n.right));
      node_hi_.col(id) = node_hi_.col(n.left).cwiseMax(node_hi_.col(n.right));
    }
  }
}

template <typename Scalar>
std::pair<std::size_t, std::size_t> MultilevelBasis<Scalar>::level_range(int l) const {
  if (l < 0 || l >= levels()) {
    throw std::invalid_argument("level_range: level out of range");
  }
  return {level_offsets_[static_cast<std::size_t>(l)], level_offsets_[static_cast<std::size_t>(l) + 1]};
}

template <typename Scalar>
int MultilevelBasis<Scalar>::owner_node(std::size_t id) const {
  if (id >= size()) {
    throw std::invalid_argument("unknown basis function id " + std::to_string(id));
  }
  if (is_root_scaling(id)) {
    return 0;
  }
  return details_[id - root_dim()].node;
}

template <typename Scalar>
void MultilevelBasis<Scalar>::expand(int node, const Vector<Scalar>& local, Vector<Scalar>& dense) const {
  const auto& n = tree_.node(node);
  if (n.is_leaf()) {
    auto cells = tree_.points_of(node);
    for (std::size_t t = 0; t < cells.size(); ++t) {
      dense[static_cast<Eigen::Index>(cells[t])] += local[static_cast<Eigen::Index>(t)];
    }
    return;
  }
  const auto& fl = factor(n.left);
  const auto& fr = factor(n.right);
  if (fl.rank > 0) {
    const Vector<Scalar> part = fl.v.leftCols(fl.rank) * local.head(fl.rank);
    expand(n.left, part, dense);
  }
  if (fr.rank > 0) {
    const Vector<Scalar> part = fr.v.leftCols(fr.rank) * local.tail(fr.rank);
    expand(n.right, part, dense);
  }
}

template <typename Scalar>
Vector<Scalar> MultilevelBasis<Scalar>::densify(std::size_t id) const {
  const int node = owner_node(id);
  const auto& f = factor(node);
  const int column = is_root_scaling(id) ? static_cast<int>(id)
                                         : f.rank + details_[id - root_dim()].local;
  Vector<Scalar> dense = Vector<Scalar>::Zero(static_cast<Eigen::Index>(size()));
  expand(node, f.v.col(column), dense);
  return dense;
}

template <typename Scalar>
Support MultilevelBasis<Scalar>::support_of(std::size_t id) const {
  const int node = owner_node(id);
  return Support{node, tree_.points_of(node), node_lo_.col(node), node_hi_.col(node)};
}

template <typename Scalar>
Eigen::VectorXd MultilevelBasis<Scalar>::support_centroid(std::size_t id) const {
  const auto cells = tree_.points_of(owner_node(id));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cell_points_.rows());
  for (std::size_t i : cells) {
    c += cell_points_.col(static_cast<Eigen::Index>(i));
  }
  return c / static_cast<double>(cells.size());
}

template <typename Scalar>
MultilevelBasis<Scalar> build_basis(const KdTree& tree, const Mesh& mesh, const Matrix<Scalar>& rows,
                                    double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw std::invalid_argument("build_basis: rank_tol must lie in (0, 1)");
  }
  const std::size_t N = tree.num_points();
  if (mesh.size() != N || static_cast<std::size_t>(rows.cols()) != N) {
    throw std::invalid_argument("build_basis: mesh (" + std::to_string(mesh.size()) + "), tree (" +
                                std::to_string(N) + ") and eigen rows (" + std::to_string(rows.cols()) +
                                ") disagree on the number of cells");
  }
  const Eigen::Index M = rows.rows();
  std::vector<LocalFactor<Scalar>> factors(tree.size());
  // Eigen inner products of each node's scaling functions: M x a.
  std::vector<Matrix<Scalar>> moments(tree.size());

  // Pre-order ids: children always have larger ids than their parent.
  for (int id = static_cast<int>(tree.size()) - 1; id >= 0; --id) {
    const auto& n = tree.node(id);
    Matrix<Scalar> block;
    if (n.is_leaf()) {
      auto cells = tree.points_of(id);
      block.resize(M, static_cast<Eigen::Index>(cells.size()));
      for (std::size_t t = 0; t < cells.size(); ++t) {
        block.col(static_cast<Eigen::Index>(t)) = rows.col(static_cast<Eigen::Index>(cells[t]));
      }
    } else {
      auto& ml = moments[static_cast<std::size_t>(n.left)];
      auto& mr = moments[static_cast<std::size_t>(n.right)];
      block.resize(M, ml.cols() + mr.cols());
      block << ml, mr;
      ml.resize(0, 0);
      mr.resize(0, 0);
    }
    auto& f = factors[static_cast<std::size_t>(id)];
    f.node = id;
    f.inputs = static_cast<int>(block.cols());
    if (block.cols() == 0) {
      f.rank = 0;
      moments[static_cast<std::size_t>(id)].resize(M, 0);
      continue;
    }
    Eigen::JacobiSVD<Matrix<Scalar>> svd(block, Eigen::ComputeFullV);
    f.singular_values = svd.singularValues();
    f.v = svd.matrixV();
    const double smax = f.singular_values.size() > 0 ? f.singular_values[0] : 0.0;
    int rank = 0;
    if (smax > 0.0) {
      for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
        if (f.singular_values[i] > rank_tol * smax) {
          ++rank;
        }
      }
    }
    f.rank = rank;
    moments[static_cast<std::size_t>(id)] = block * f.v.leftCols(rank);
  }

  MultilevelBasis<Scalar> basis(tree, std::move(factors), mesh.points, mesh.box_lo, mesh.box_hi,
                                static_cast<std::size_t>(M), rank_tol);
  if (tree.leaf_size() <= static_cast<std::size_t>(M)) {
    basis.add_warning("leaf size n0 = " + std::to_string(tree.leaf_size()) + " does not exceed M = " +
                      std::to_string(M) + "; leaf cells may carry no detail functions");
  }
  if (basis.root_dim() != static_cast<std::size_t>(M)) {
    basis.add_warning("root scaling dimension " + std::to_string(basis.root_dim()) + " differs from M = " +
                      std::to_string(M) + " (eigen rows are rank deficient at rank_tol)");
  }
  return basis;
}

template <typename Scalar>
MultilevelBasis<Scalar> build_basis(const KdTree& tree, const Mesh& mesh, const IndicatorBasis& indicators,
                                    const EigenModel& model, double rank_tol) {
  const auto rows = eigen_inner_products(mesh, indicators, model);
  if constexpr (std::is_same_v<Scalar, double>) {
    if (model.field() == Field::Complex) {
      throw std::invalid_argument("build_basis: model '" + model.name() +
                                  "' is complex-valued; a real basis was requested");
    }
    return build_basis<double>(tree, mesh, real_rows(rows), rank_tol);
  } else {
    return build_basis<cdouble>(tree, mesh, rows, rank_tol);
  }
}

template <typename Scalar>
Matrix<Scalar> densify_all(const MultilevelBasis<Scalar>& basis) {
  const auto N = static_cast<Eigen::Index>(basis.size());
  Matrix<Scalar> B(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    B.col(j) = basis.densify(static_cast<std::size_t>(j));
  }
  return B;
}

template class MultilevelBasis<double>;
template class MultilevelBasis<cdouble>;

template MultilevelBasis<double> build_basis<double>(const KdTree&, const Mesh&, const Matrix<double>&, double);
template MultilevelBasis<cdouble> build_basis<cdouble>(const KdTree&, const Mesh&, const Matrix<cdouble>&,
                                                       double);
template MultilevelBasis<double> build_basis<double>(const KdTree&, const Mesh&, const IndicatorBasis&,
                                                     const EigenModel&, double);
template MultilevelBasis<cdouble> build_basis<cdouble>(const KdTree&, const Mesh&, const IndicatorBasis&,
                                                       const EigenModel&, double);
template Matrix<double> densify_all<double>(const MultilevelBasis<double>&);
template Matrix<cdouble> densify_all<cdouble>(const MultilevelBasis<cdouble>&);

}  // namespace mlcd
