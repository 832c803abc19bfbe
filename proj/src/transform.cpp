#include "mlcd/transform.hpp"

#include <string>
#include <vector>

namespace mlcd {

namespace {

template <typename Scalar>
void check_size(const MultilevelBasis<Scalar>& basis, Eigen::Index n, const char* what) {
  if (static_cast<std::size_t>(n) != basis.size()) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(basis.size()) +
                                " coefficients, got " + std::to_string(n));
  }
}

}  // namespace

template <typename Scalar>
MultilevelCoefficients<Scalar> zero_coefficients(const MultilevelBasis<Scalar>& basis) {
  MultilevelCoefficients<Scalar> mc;
  mc.root = Vector<Scalar>::Zero(static_cast<Eigen::Index>(basis.root_dim()));
  mc.details = Vector<Scalar>::Zero(static_cast<Eigen::Index>(basis.detail_count()));
  return mc;
}

template <typename Scalar>
MultilevelCoefficients<Scalar> forward(const MultilevelBasis<Scalar>& basis, const Vector<Scalar>& fine) {
  check_size(basis, fine.size(), "forward");
  const auto& tree = basis.tree();
  MultilevelCoefficients<Scalar> mc;
  mc.details.resize(static_cast<Eigen::Index>(basis.detail_count()));
  std::vector<Vector<Scalar>> up(tree.size());
  Vector<Scalar> x;
  for (int id = static_cast<int>(tree.size()) - 1; id >= 0; --id) {
    const auto& n = tree.node(id);
    const auto& f = basis.factor(id);
    if (f.inputs == 0) {
      continue;
    }
    if (n.is_leaf()) {
      auto cells = tree.points_of(id);
      x.resize(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t t = 0; t < cells.size(); ++t) {
        x[static_cast<Eigen::Index>(t)] = fine[static_cast<Eigen::Index>(cells[t])];
      }
    } else {
      auto& l = up[static_cast<std::size_t>(n.left)];
      auto& r = up[static_cast<std::size_t>(n.right)];
      x.resize(l.size() + r.size());
      x << l, r;
      l.resize(0);
      r.resize(0);
    }
    const Vector<Scalar> y = f.v.adjoint() * x;
    const int nd = f.details();
    if (nd > 0) {
      mc.details.segment(static_cast<Eigen::Index>(f.detail_offset), nd) = y.tail(nd);
    }
    up[static_cast<std::size_t>(id)] = y.head(f.rank);
  }
  mc.root = up.front();
  return mc;
}

template <typename Scalar>
Vector<Scalar> inverse(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc) {
  if (static_cast<std::size_t>(mc.root.size()) != basis.root_dim() ||
      static_cast<std::size_t>(mc.details.size()) != basis.detail_count()) {
    throw std::invalid_argument("inverse: coefficient layout does not match the basis (" +
                                std::to_string(mc.size()) + " vs " + std::to_string(basis.size()) + ")");
  }
  const auto& tree = basis.tree();
  Vector<Scalar> fine = Vector<Scalar>::Zero(static_cast<Eigen::Index>(basis.size()));
  std::vector<Vector<Scalar>> down(tree.size());
  down[0] = mc.root;
  Vector<Scalar> y;
  for (int id = 0; id < static_cast<int>(tree.size()); ++id) {
    const auto& n = tree.node(id);
    const auto& f = basis.factor(id);
    if (f.inputs == 0) {
      continue;
    }
    const int nd = f.details();
    y.resize(f.inputs);
    y.head(f.rank) = down[static_cast<std::size_t>(id)];
    if (nd > 0) {
      y.tail(nd) = mc.details.segment(static_cast<Eigen::Index>(f.detail_offset), nd);
    }
    down[static_cast<std::size_t>(id)].resize(0);
    const Vector<Scalar> x = f.v * y;
    if (n.is_leaf()) {
      auto cells = tree.points_of(id);
      for (std::size_t t = 0; t < cells.size(); ++t) {
        fine[static_cast<Eigen::Index>(cells[t])] = x[static_cast<Eigen::Index>(t)];
      }
    } else {
      const int al = basis.factor(n.left).rank;
      const int ar = basis.factor(n.right).rank;
      down[static_cast<std::size_t>(n.left)] = x.head(al);
      down[static_cast<std::size_t>(n.right)] = x.tail(ar);
    }
  }
  return fine;
}

template <typename Scalar>
MultilevelCoefficients<Scalar> dense_forward(const MultilevelBasis<Scalar>& basis, const Vector<Scalar>& fine) {
  check_size(basis, fine.size(), "dense_forward");
  auto mc = zero_coefficients(basis);
  for (std::size_t id = 0; id < basis.size(); ++id) {
    const Scalar d = basis.densify(id).dot(fine);  // conjugates the basis function
    if (basis.is_root_scaling(id)) {
      mc.root[static_cast<Eigen::Index>(id)] = d;
    } else {
      mc.details[static_cast<Eigen::Index>(id - basis.root_dim())] = d;
    }
  }
  return mc;
}

template MultilevelCoefficients<double> zero_coefficients(const MultilevelBasis<double>&);
template MultilevelCoefficients<cdouble> zero_coefficients(const MultilevelBasis<cdouble>&);
template MultilevelCoefficients<double> forward(const MultilevelBasis<double>&, const Vector<double>&);
template MultilevelCoefficients<cdouble> forward(const MultilevelBasis<cdouble>&, const Vector<cdouble>&);
template Vector<double> inverse(const MultilevelBasis<double>&, const MultilevelCoefficients<double>&);
template Vector<cdouble> inverse(const MultilevelBasis<cdouble>&, const MultilevelCoefficients<cdouble>&);
template MultilevelCoefficients<double> dense_forward(const MultilevelBasis<double>&, const Vector<double>&);
template MultilevelCoefficients<cdouble> dense_forward(const MultilevelBasis<cdouble>&, const Vector<cdouble>&);

}  // namespace mlcd
