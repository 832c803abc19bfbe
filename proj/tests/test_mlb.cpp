#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/mlb.hpp"

using namespace mlcd;

namespace {

EigenModel constant_model() {
  std::vector<EigenPair> pairs(1);
  pairs[0].index = 1;
  pairs[0].eigenvalue = 1.0;
  pairs[0].function = [](std::span<const double>) { return cdouble(1.0); };
  return {"constant", Interval{0.0, 1.0}, pairs, Field::Real, CoefficientLaw::StandardNormal};
}

template <typename Scalar>
double gram_deviation(const MultilevelBasis<Scalar>& basis) {
  const Matrix<Scalar> Q = densify_all(basis);
  const auto n = Q.cols();
  return (Q.adjoint() * Q - Matrix<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff();
}

template <typename Scalar>
double v0_leak(const MultilevelBasis<Scalar>& basis, const Matrix<Scalar>& rows) {
  double worst = 0.0;
  for (std::size_t k = 0; k < basis.detail_count(); ++k) {
    const Vector<Scalar> psi = basis.densify(basis.detail_id(k));
    worst = std::max(worst, (rows * psi).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("constant model on four cells") {
  const auto mesh = cell_mesh(uniform_interval_mesh(0, 1, 4));
  const auto ind = make_indicator_basis(mesh, Mode::Continuous);
  const auto tree = make_tree(mesh.points, 2);
  const auto basis = build_basis<double>(tree, mesh, ind, constant_model());
  CHECK(basis.root_dim() == 1);
  CHECK(basis.detail_count() == 3);
  CHECK(basis.levels() == 2);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(basis.densify(basis.detail_id(k)).sum()) < 1e-14);
  }
  const Eigen::VectorXd root = basis.densify(0);
  CHECK((root.cwiseAbs().array() - 0.5).abs().maxCoeff() < 1e-14);
  CHECK(gram_deviation(basis) < 1e-14);
}

TEST_CASE("full-rank model leaves no detail functions") {
  const auto mesh = testing::random_point_mesh(12, 2, 4);
  const auto rows = testing::random_matrix<double>(12, 12, 5);
  const auto basis = build_basis<double>(make_tree(mesh.points, 3), mesh, rows);
  CHECK(basis.root_dim() == 12);
  CHECK(basis.detail_count() == 0);
  CHECK(basis.warnings().size() == 1);  // n0 <= M
}

TEST_CASE("generic rows on a random mesh") {
  const auto mesh = testing::random_point_mesh(64, 2, 6);
  const auto rows = testing::random_matrix<double>(3, 64, 7);
  const auto basis = build_basis<double>(make_tree(mesh.points, 8), mesh, rows);
  CHECK(basis.root_dim() == 3);
  CHECK(basis.detail_count() == 61);
  std::size_t total = basis.root_dim();
  for (int l = 0; l < basis.levels(); ++l) {
    total += basis.level_dim(l);
  }
  CHECK(total == 64);
  CHECK(basis.warnings().empty());
  CHECK(gram_deviation(basis) < 1e-12);
  CHECK(v0_leak(basis, Matrix<double>(rows)) < 1e-12);

  for (std::size_t id = 0; id < basis.size(); ++id) {
    const Eigen::VectorXd f = basis.densify(id);
    CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto s = basis.support_of(id);
    std::vector<char> inside(64, 0);
    for (std::size_t c : s.cells) {
      inside[c] = 1;
    }
    for (Eigen::Index j = 0; j < 64; ++j) {
      if (!inside[static_cast<std::size_t>(j)]) {
        CHECK(f[j] == 0.0);
      }
    }
  }
  CHECK(basis.support_of(0).cells.size() == 64);
  CHECK_THROWS(basis.densify(64));
}

TEST_CASE("factor invariants") {
  const auto mesh = testing::random_point_mesh(100, 1, 8);
  const auto rows = testing::random_matrix<double>(4, 100, 9);
  const auto basis = build_basis<double>(make_tree(mesh.points, 10), mesh, rows);
  for (const auto& f : basis.factors()) {
    if (f.inputs == 0) {
      continue;
    }
    CHECK((f.v.adjoint() * f.v - Eigen::MatrixXd::Identity(f.inputs, f.inputs)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.rank <= std::min(4, f.inputs));
  }
}

TEST_CASE("leaf supports stay inside their leaf") {
  const auto mesh = testing::random_point_mesh(30, 1, 10);
  const auto rows = testing::random_matrix<double>(2, 30, 11);
  const auto tree = make_tree(mesh.points, 5);
  const auto basis = build_basis<double>(tree, mesh, rows);
  const int leaf_level = basis.levels() - 1;
  const auto [b, e] = basis.level_range(leaf_level);
  for (std::size_t k = b; k < e; ++k) {
    const auto& key = basis.details()[k];
    const auto leaf_pts = tree.points_of(key.node);
    const Eigen::VectorXd f = basis.densify(basis.detail_id(k));
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      if (f[j] != 0.0) {
        CHECK(std::find(leaf_pts.begin(), leaf_pts.end(), static_cast<std::size_t>(j)) != leaf_pts.end());
      }
    }
  }
}

TEST_CASE("root scaling span equals the eigen span") {
  const auto mesh = cell_mesh(uniform_interval_mesh(0, 1, 200));
  const auto ind = make_indicator_basis(mesh, Mode::Continuous);
  const auto model = brownian_model(5);
  const auto basis = build_basis<double>(make_tree(mesh.points, 12), mesh, ind, model);
  CHECK(basis.root_dim() == 5);
  Eigen::MatrixXd R(200, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    R.col(static_cast<Eigen::Index>(i)) = basis.densify(i);
  }
  const Eigen::MatrixXd rows = real_rows(eigen_inner_products(mesh, ind, model));
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Eigen::VectorXd phi = rows.row(i).transpose();
    const Eigen::VectorXd resid = phi - R * (R.transpose() * phi);
    CHECK(resid.norm() <= 1e-8);
  }
}

TEST_CASE("projector onto the orthogonal complement matches a dense construction") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t N = 16 + 8 * seed;
    const auto M = static_cast<Eigen::Index>(1 + seed % 4);
    const auto mesh = testing::random_point_mesh(N, 2, 20 + seed);
    const auto rows = testing::random_matrix<double>(M, static_cast<Eigen::Index>(N), 30 + seed);
    const auto basis = build_basis<double>(make_tree(mesh.points, 4 + seed), mesh, rows);
    const Eigen::MatrixXd Q = densify_all(basis);
    const Eigen::MatrixXd D = Q.rightCols(static_cast<Eigen::Index>(basis.detail_count()));
    const Eigen::MatrixXd P = D * D.transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(rows.transpose());
    const Eigen::MatrixXd E = qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N), M);
    const Eigen::MatrixXd P_dense =
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N)) - E * E.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P - P_dense);
    CHECK(svd.singularValues()[0] <= 1e-8);
  }
}

TEST_CASE("complex basis on the sphere") {
  const auto mesh = sphere_vertex_mesh(icosphere(2));
  const auto ind = make_indicator_basis(mesh, Mode::Discrete);
  const auto model = sfbm_model(3);
  const auto basis = build_basis<cdouble>(make_tree(mesh.points, 16), mesh, ind, model);
  CHECK(basis.field() == Field::Complex);
  CHECK(basis.root_dim() == model.size());
  CHECK(basis.root_dim() + basis.detail_count() == mesh.size());
  CHECK(gram_deviation(basis) < 1e-10);
  CHECK(v0_leak(basis, eigen_inner_products(mesh, ind, model)) < 1e-10);
  CHECK_THROWS_AS(build_basis<double>(make_tree(mesh.points, 16), mesh, ind, model), std::invalid_argument);
}

TEST_CASE("zero blocks get rank zero") {
  const auto mesh = testing::random_point_mesh(20, 1, 40);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 20);
  const auto basis = build_basis<double>(make_tree(mesh.points, 5), mesh, rows);
  CHECK(basis.root_dim() == 0);
  CHECK(basis.detail_count() == 20);
  CHECK(gram_deviation(basis) < 1e-14);
}

TEST_CASE("argument checks") {
  const auto mesh = testing::random_point_mesh(10, 1, 41);
  const auto rows = testing::random_matrix<double>(2, 10, 42);
  const auto tree = make_tree(mesh.points, 3);
  CHECK_THROWS_AS(build_basis<double>(tree, mesh, rows, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_basis<double>(tree, mesh, rows, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_basis<double>(tree, testing::random_point_mesh(11, 1, 1), rows), std::invalid_argument);
  CHECK_THROWS_AS(build_basis<double>(tree, mesh, Eigen::MatrixXd(rows.leftCols(9))), std::invalid_argument);
  const auto single = testing::random_point_mesh(1, 1, 2);
  const auto b1 = build_basis<double>(make_tree(single.points, 4), single, Eigen::MatrixXd::Ones(1, 1));
  CHECK(b1.root_dim() == 1);
  CHECK(b1.detail_count() == 0);
}
