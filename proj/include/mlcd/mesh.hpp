#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlcd/kl_models.hpp"
#include "mlcd/types.hpp"

namespace mlcd {

/// Continuous mode: chi_i = measure(tau_i)^{-1/2} 1_{tau_i} with the Lebesgue
/// inner product. Discrete mode: unit vectors, one per cell.
enum class Mode { Continuous, Discrete };

Mode parse_mode(const std::string& s);
const char* to_string(Mode m);

/// Collection of N top-dimensional simplices of equal order in R^d.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;
  /// `vertices` is d x V, `simplices` is (k+1) x N with 0-based vertex ids.
  SimplicialComplex(Eigen::MatrixXd vertices, Eigen::MatrixXi simplices);

  int ambient_dim() const { return static_cast<int>(vertices_.rows()); }
  int simplex_dim() const { return static_cast<int>(simplices_.rows()) - 1; }
  std::size_t size() const { return static_cast<std::size_t>(simplices_.cols()); }
  std::size_t num_vertices() const { return static_cast<std::size_t>(vertices_.cols()); }

  const Eigen::MatrixXd& vertices() const { return vertices_; }
  const Eigen::MatrixXi& simplices() const { return simplices_; }
  const Eigen::MatrixXd& barycenters() const { return barycenters_; }
  const Eigen::VectorXd& measures() const { return measures_; }

  /// Pairwise check that no simplex's barycenter lies inside another simplex
  /// and that no two simplices share their full vertex set. O(N^2); refuses
  /// N > limit.
  void validate_intersections(std::size_t limit = 10000) const;

 private:
  Eigen::MatrixXd vertices_;
  Eigen::MatrixXi simplices_;
  Eigen::MatrixXd barycenters_;
  Eigen::VectorXd measures_;
};

/// N equal segments on [a, b].
SimplicialComplex uniform_interval_mesh(double a, double b, std::size_t N);

/// Icosahedron subdivided `subdivisions` times, vertices projected to the unit
/// sphere. Vertex count is 10 * 4^s + 2.
SimplicialComplex icosphere(int subdivisions);

/// Cell table consumed by the tree, basis and detectors: one sample point per
/// cell, its measure, and the closed extent of the cell.
struct Mesh {
  Eigen::MatrixXd points;  // d x N
  Eigen::VectorXd measures;
  Eigen::MatrixXd box_lo;  // d x N
  Eigen::MatrixXd box_hi;  // d x N
  bool sphere = false;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  int dim() const { return static_cast<int>(points.rows()); }
  std::span<const double> point(std::size_t i) const {
    return {points.col(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(points.rows())};
  }
};

/// Cells are the simplices; sample points are barycenters.
Mesh cell_mesh(const SimplicialComplex& complex);

/// Vertices of a spherical complex treated as the barycenters of an equal-area
/// dual partition, each with weight 4 pi / count.
Mesh sphere_vertex_mesh(const SimplicialComplex& complex);

struct IndicatorBasis {
  Mode mode = Mode::Continuous;
  Eigen::VectorXd normalizers;  // c_i
  // <u, chi_i> ~ u(x_i) * weight(i)
  double weight(std::size_t i) const {
    return mode == Mode::Discrete ? 1.0 : 1.0 / normalizers[static_cast<Eigen::Index>(i)];
  }
  std::size_t size() const { return static_cast<std::size_t>(normalizers.size()); }
};

IndicatorBasis make_indicator_basis(const Mesh& mesh, Mode mode);

/// Fine coefficients from one sample per cell.
template <typename Scalar>
Vector<Scalar> project_signal(const IndicatorBasis& basis, const Vector<Scalar>& samples) {
  if (static_cast<std::size_t>(samples.size()) != basis.size()) {
    throw std::invalid_argument("project_signal: expected one sample per cell (got " +
                                std::to_string(samples.size()) + ", mesh has " +
                                std::to_string(basis.size()) + ")");
  }
  Vector<Scalar> c(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    c[i] = samples[i] * basis.weight(static_cast<std::size_t>(i));
  }
  return c;
}

/// Fine coefficients from a function evaluated at the cell points.
template <typename Scalar, typename Fn>
Vector<Scalar> project_function(const Mesh& mesh, const IndicatorBasis& basis, Fn&& fn) {
  Vector<Scalar> samples(static_cast<Eigen::Index>(mesh.size()));
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    samples[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(fn(mesh.point(i)));
  }
  return project_signal<Scalar>(basis, samples);
}

/// M x |cells| matrix of <phi_i, chi_j> with conjugation on phi. An empty
/// `cells` selection yields an M x 0 matrix; pass all cells for the full table.
Matrix<cdouble> eigen_inner_products(const Mesh& mesh, const IndicatorBasis& basis,
                                     const EigenModel& model, std::span<const std::size_t> cells);
Matrix<cdouble> eigen_inner_products(const Mesh& mesh, const IndicatorBasis& basis,
                                     const EigenModel& model);

/// Real part of an eigen-row table; throws when any imaginary part is non-zero.
Eigen::MatrixXd real_rows(const Matrix<cdouble>& rows);

}  // namespace mlcd
