#include "doctest.h"
#include "helpers.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/transform.hpp"

using namespace mlcd;

namespace {

template <typename Scalar>
MultilevelBasis<Scalar> random_basis(std::size_t N, Eigen::Index M, std::size_t n0, std::uint64_t seed) {
  const auto mesh = testing::random_point_mesh(N, 2, seed);
  const auto rows = testing::random_matrix<Scalar>(M, static_cast<Eigen::Index>(N), seed + 1);
  return build_basis<Scalar>(make_tree(mesh.points, n0), mesh, rows);
}

template <typename Scalar>
double max_diff(const MultilevelCoefficients<Scalar>& a, const MultilevelCoefficients<Scalar>& b) {
  return std::max((a.root - b.root).cwiseAbs().maxCoeff(), (a.details - b.details).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE_TEMPLATE("forward agrees with dense inner products", Scalar, double, cdouble) {
  const auto basis = random_basis<Scalar>(512, 4, 16, 1);
  for (int t = 0; t < 3; ++t) {
    const Vector<Scalar> c = testing::random_matrix<Scalar>(512, 1, 100 + t);
    const auto fast = forward(basis, c);
    const auto slow = dense_forward(basis, c);
    CHECK(fast.size() == 512);
    CHECK(max_diff(fast, slow) <= 1e-10);
    CHECK((inverse(basis, fast) - c).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(fast.energy() - c.squaredNorm()) <= 1e-10 * c.squaredNorm());
  }
}

TEST_CASE_TEMPLATE("basis functions map to unit coefficients", Scalar, double, cdouble) {
  const auto basis = random_basis<Scalar>(64, 3, 6, 2);
  for (std::size_t id = 0; id < basis.size(); id += 5) {
    const auto mc = forward(basis, basis.densify(id));
    for (std::size_t j = 0; j < basis.size(); ++j) {
      CHECK(std::abs(mc[j] - Scalar(j == id ? 1.0 : 0.0)) <= 1e-10);
    }
    auto unit = zero_coefficients(basis);
    if (id < basis.root_dim()) {
      unit.root[static_cast<Eigen::Index>(id)] = 1.0;
    } else {
      unit.details[static_cast<Eigen::Index>(id - basis.root_dim())] = 1.0;
    }
    CHECK((inverse(basis, unit) - basis.densify(id)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(inverse(basis, zero_coefficients(basis)).isZero());
  CHECK(forward(basis, Vector<Scalar>(Vector<Scalar>::Zero(64))).energy() == 0.0);
  CHECK(dense_forward(basis, Vector<Scalar>(Vector<Scalar>::Zero(64))).energy() == 0.0);
}

TEST_CASE("signals in V0 have no detail energy") {
  const auto mesh = cell_mesh(uniform_interval_mesh(0, 1, 256));
  const auto ind = make_indicator_basis(mesh, Mode::Continuous);
  const auto model = brownian_model(6);
  const auto basis = build_basis<double>(make_tree(mesh.points, 16), mesh, ind, model);
  const Eigen::MatrixXd rows = real_rows(eigen_inner_products(mesh, ind, model));
  const auto mc = forward(basis, Eigen::VectorXd(rows.row(0).transpose()));
  CHECK(mc.details.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(mc.root.norm() == doctest::Approx(rows.row(0).norm()).epsilon(1e-12));
}

TEST_CASE("locality: a single-cell change touches only functions supported there") {
  const auto basis = random_basis<double>(128, 2, 8, 3);
  const Eigen::VectorXd c = testing::random_matrix<double>(128, 1, 4);
  Eigen::VectorXd c2 = c;
  c2[77] += 1.0;
  const auto a = forward(basis, c);
  const auto b = forward(basis, c2);
  for (std::size_t id = 0; id < basis.size(); ++id) {
    const auto s = basis.support_of(id);
    const bool touches = std::find(s.cells.begin(), s.cells.end(), std::size_t(77)) != s.cells.end();
    if (!touches) {
      CHECK(a[id] == b[id]);
    }
  }
}

TEST_CASE("size mismatches are rejected") {
  const auto basis = random_basis<double>(32, 2, 4, 5);
  CHECK_THROWS_AS(forward(basis, Eigen::VectorXd(Eigen::VectorXd::Zero(31))), std::invalid_argument);
  CHECK_THROWS_AS(dense_forward(basis, Eigen::VectorXd(Eigen::VectorXd::Zero(33))), std::invalid_argument);
  MultilevelCoefficients<double> bad{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(3)};
  CHECK_THROWS_AS(inverse(basis, bad), std::invalid_argument);
}
