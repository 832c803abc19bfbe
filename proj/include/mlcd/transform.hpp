#pragma once

#include "mlcd/mlb.hpp"

namespace mlcd {

/// Root scaling coefficients plus detail coefficients d^l_k aligned with
/// MultilevelBasis::details().
template <typename Scalar>
struct MultilevelCoefficients {
  Vector<Scalar> root;
  Vector<Scalar> details;

  std::size_t size() const { return static_cast<std::size_t>(root.size() + details.size()); }
  static constexpr Field field() { return field_of<Scalar>(); }

  /// Coefficient by global function id.
  Scalar operator[](std::size_t id) const {
    const auto r = static_cast<std::size_t>(root.size());
    return id < r ? root[static_cast<Eigen::Index>(id)] : details[static_cast<Eigen::Index>(id - r)];
  }
  double root_energy() const { return root.squaredNorm(); }
  double detail_energy() const { return details.squaredNorm(); }
  double energy() const { return root_energy() + detail_energy(); }
};

/// Leaf-to-root cascade applying each cell's V^H; O(N n) for fixed M and n0.
template <typename Scalar>
MultilevelCoefficients<Scalar> forward(const MultilevelBasis<Scalar>& basis, const Vector<Scalar>& fine);

/// Root-to-leaf adjoint cascade.
template <typename Scalar>
Vector<Scalar> inverse(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc);

/// Explicit inner products with every densified function. O(N^2); test oracle.
template <typename Scalar>
MultilevelCoefficients<Scalar> dense_forward(const MultilevelBasis<Scalar>& basis, const Vector<Scalar>& fine);

/// Zero coefficients shaped for `basis`.
template <typename Scalar>
MultilevelCoefficients<Scalar> zero_coefficients(const MultilevelBasis<Scalar>& basis);

}  // namespace mlcd
