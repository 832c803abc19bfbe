#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlcd/kdtree.hpp"
#include "mlcd/mesh.hpp"
#include "mlcd/types.hpp"

namespace mlcd {

/// Per-cell factorization. The cell's s input functions (leaf indicators, or the
/// concatenated scaling functions of the left then right child) are rotated by
/// the unitary right factor V of the SVD of their eigen inner-product block:
/// columns [0, rank) are scaling functions, [rank, s) detail functions.
template <typename Scalar>
struct LocalFactor {
  using scalar_type = Scalar;
  int node = 0;
  int inputs = 0;
  int rank = 0;
  Matrix<Scalar> v;  // s x s
  Eigen::VectorXd singular_values;
  std::size_t detail_offset = 0;  // first index in the detail registry

  int details() const { return inputs - rank; }
};

/// Canonical key of a detail function psi^l_k.
struct DetailKey {
  int level = 0;
  int node = 0;
  int local = 0;  // 0-based among the node's detail functions
};

struct Support {
  int node = 0;
  std::span<const std::size_t> cells;  // fine cell ids
  Eigen::VectorXd lo;                  // closed bounding box of the cells
  Eigen::VectorXd hi;
};

/// Orthonormal basis V_0 + W_0 + ... + W_{n-1} over the fine indicator space,
/// stored hierarchically. Global function ids: [0, root_dim) are the root
/// scaling functions, then detail functions in (level, node, local) order.
template <typename Scalar>
class MultilevelBasis {
 public:
  MultilevelBasis() = default;
  MultilevelBasis(KdTree tree, std::vector<LocalFactor<Scalar>> factors, Eigen::MatrixXd cell_points,
                  Eigen::MatrixXd cell_lo, Eigen::MatrixXd cell_hi, std::size_t num_modes, double rank_tol);

  const KdTree& tree() const { return tree_; }
  const std::vector<LocalFactor<Scalar>>& factors() const { return factors_; }
  const LocalFactor<Scalar>& factor(int node) const { return factors_.at(static_cast<std::size_t>(node)); }

  std::size_t size() const { return tree_.num_points(); }
  std::size_t num_modes() const { return num_modes_; }
  double rank_tol() const { return rank_tol_; }
  static constexpr Field field() { return field_of<Scalar>(); }

  std::size_t root_dim() const { return static_cast<std::size_t>(factors_.front().rank); }
  std::size_t detail_count() const { return details_.size(); }
  const std::vector<DetailKey>& details() const { return details_; }

  /// Number of detail levels n (tree depth + 1); level l holds W_l.
  int levels() const { return tree_.depth() + 1; }
  /// Half-open range of detail indices at level l.
  std::pair<std::size_t, std::size_t> level_range(int l) const;
  std::size_t level_dim(int l) const {
    const auto [b, e] = level_range(l);
    return e - b;
  }

  bool is_root_scaling(std::size_t id) const { return id < root_dim(); }
  /// Detail-registry index -> global id and back.
  std::size_t detail_id(std::size_t detail_index) const { return root_dim() + detail_index; }

  Vector<Scalar> densify(std::size_t id) const;
  Support support_of(std::size_t id) const;
  /// Mean of the fine cell points in the support.
  Eigen::VectorXd support_centroid(std::size_t id) const;

  const Eigen::MatrixXd& cell_points() const { return cell_points_; }
  const Eigen::MatrixXd& cell_lo() const { return cell_lo_; }
  const Eigen::MatrixXd& cell_hi() const { return cell_hi_; }

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  void expand(int node, const Vector<Scalar>& local, Vector<Scalar>& dense) const;
  int owner_node(std::size_t id) const;

  KdTree tree_;
  std::vector<LocalFactor<Scalar>> factors_;
  std::vector<DetailKey> details_;
  std::vector<std::size_t> level_offsets_;
  Eigen::MatrixXd cell_points_;
  Eigen::MatrixXd cell_lo_;
  Eigen::MatrixXd cell_hi_;
  Eigen::MatrixXd node_lo_;
  Eigen::MatrixXd node_hi_;
  std::size_t num_modes_ = 0;
  double rank_tol_ = 1e-10;
  std::vector<std::string> warnings_;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Bottom-up construction from the M x N table of <phi_i, chi_j>.
template <typename Scalar>
MultilevelBasis<Scalar> build_basis(const KdTree& tree, const Mesh& mesh, const Matrix<Scalar>& rows,
                                    double rank_tol = kDefaultRankTol);

/// Convenience overload evaluating the eigen rows from a model. A complex
/// model cannot be built into a real basis.
template <typename Scalar>
MultilevelBasis<Scalar> build_basis(const KdTree& tree, const Mesh& mesh, const IndicatorBasis& indicators,
                                    const EigenModel& model, double rank_tol = kDefaultRankTol);

/// N x N matrix whose columns are the densified functions in global id order.
template <typename Scalar>
Matrix<Scalar> densify_all(const MultilevelBasis<Scalar>& basis);

extern template class MultilevelBasis<double>;
extern template class MultilevelBasis<cdouble>;

}  // namespace mlcd
