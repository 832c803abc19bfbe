#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/mesh.hpp"

using namespace mlcd;

TEST_CASE("uniform interval mesh") {
  const auto c = uniform_interval_mesh(0, 1, 4);
  CHECK(c.size() == 4);
  CHECK(c.simplex_dim() == 1);
  const double mids[4] = {0.125, 0.375, 0.625, 0.875};
  for (int i = 0; i < 4; ++i) {
    CHECK(c.barycenters()(0, i) == doctest::Approx(mids[i]).epsilon(1e-15));
    CHECK(c.measures()[i] == doctest::Approx(0.25).epsilon(1e-15));
  }
  CHECK(uniform_interval_mesh(0, 1, 500).size() == 500);
  CHECK_THROWS_AS(uniform_interval_mesh(1, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS(uniform_interval_mesh(0, 1, 0), std::invalid_argument);

  const auto mesh = cell_mesh(c);
  const auto ind = make_indicator_basis(mesh, Mode::Continuous);
  for (int i = 0; i < 4; ++i) {
    CHECK(ind.normalizers[i] == doctest::Approx(2.0));
    CHECK(mesh.box_lo(0, i) == doctest::Approx(0.25 * i));
    CHECK(mesh.box_hi(0, i) == doctest::Approx(0.25 * (i + 1)));
  }
  CHECK(make_indicator_basis(mesh, Mode::Discrete).normalizers.isOnes());
}

TEST_CASE("icosphere") {
  CHECK(icosphere(0).num_vertices() == 12);
  CHECK(icosphere(0).size() == 20);
  const auto s5 = icosphere(5);
  CHECK(s5.num_vertices() == 10242);
  CHECK(s5.ambient_dim() == 3);
  CHECK(s5.simplex_dim() == 2);
  CHECK((s5.vertices().colwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(icosphere(9), std::invalid_argument);
  CHECK_THROWS_AS(icosphere(-1), std::invalid_argument);
  const auto mesh = sphere_vertex_mesh(icosphere(2));
  CHECK(mesh.size() == 162);
  CHECK(mesh.sphere);
  CHECK(mesh.measures.sum() == doctest::Approx(4.0 * std::numbers::pi));
  CHECK((mesh.box_lo - mesh.points).norm() == 0.0);
}

TEST_CASE("simplicial complex validation") {
  Eigen::MatrixXd V(2, 4);
  V << 0, 1, 0, 1, 0, 0, 1, 1;
  Eigen::MatrixXi S(3, 2);
  S << 0, 1, 1, 3, 2, 2;
  const SimplicialComplex ok(V, S);
  CHECK(ok.measures().sum() == doctest::Approx(1.0));
  ok.validate_intersections();

  Eigen::MatrixXi bad_id(3, 1);
  bad_id << 0, 1, 7;
  CHECK_THROWS_AS(SimplicialComplex(V, bad_id), std::invalid_argument);
  Eigen::MatrixXi repeated(3, 1);
  repeated << 0, 1, 1;
  CHECK_THROWS_AS(SimplicialComplex(V, repeated), std::invalid_argument);
  Eigen::MatrixXd line(2, 3);
  line << 0, 1, 2, 0, 1, 2;
  Eigen::MatrixXi flat(3, 1);
  flat << 0, 1, 2;
  CHECK_THROWS_AS(SimplicialComplex(line, flat), std::invalid_argument);
  Eigen::MatrixXi dup(3, 2);
  dup << 0, 2, 1, 1, 2, 0;
  CHECK_THROWS(SimplicialComplex(V, dup));
}

TEST_CASE("project_signal") {
  const auto mesh = cell_mesh(uniform_interval_mesh(0, 1, 4));
  const auto cont = make_indicator_basis(mesh, Mode::Continuous);
  const auto disc = make_indicator_basis(mesh, Mode::Discrete);
  const auto ones = project_function<double>(mesh, cont, [](auto) { return 1.0; });
  CHECK((ones.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK(project_function<double>(mesh, cont, [](auto) { return 0.0; }).isZero());
  const auto id = project_function<double>(mesh, disc, [](auto x) { return x[0]; });
  CHECK((id - mesh.points.row(0).transpose()).norm() == 0.0);
  Eigen::VectorXd three(3);
  CHECK_THROWS_AS(project_signal<double>(cont, three), std::invalid_argument);

  Eigen::VectorXd u = Eigen::VectorXd::Random(4);
  Eigen::VectorXd v = Eigen::VectorXd::Random(4);
  const auto lin = project_signal<double>(cont, Eigen::VectorXd(2.0 * u - 3.0 * v));
  CHECK((lin - (2.0 * project_signal<double>(cont, u) - 3.0 * project_signal<double>(cont, v))).norm() < 1e-14);
}

TEST_CASE("eigen inner products") {
  const auto mesh = cell_mesh(uniform_interval_mesh(0, 1, 4));
  const auto cont = make_indicator_basis(mesh, Mode::Continuous);
  std::vector<EigenPair> pairs(1);
  pairs[0].index = 1;
  pairs[0].eigenvalue = 1.0;
  pairs[0].function = [](std::span<const double>) { return cdouble(1.0); };
  const EigenModel constant("constant", Interval{0.0, 1.0}, pairs, Field::Real, CoefficientLaw::StandardNormal);
  const auto rows = eigen_inner_products(mesh, cont, constant);
  CHECK(rows.rows() == 1);
  CHECK((rows.array() - cdouble(0.5)).abs().maxCoeff() < 1e-15);
  const std::vector<std::size_t> none;
  CHECK(eigen_inner_products(mesh, cont, constant, none).cols() == 0);

  // row norms converge to 1 at the midpoint-rule rate
  const auto model = gauss_model(3, 0.3, 1.0);
  double prev_err = 1.0;
  for (int p = 7; p <= 12; ++p) {
    const auto m = cell_mesh(uniform_interval_mesh(0, 1, std::size_t(1) << p));
    const auto r = eigen_inner_products(m, make_indicator_basis(m, Mode::Continuous), brownian_model(3));
    const double err = std::abs(r.row(2).norm() - 1.0);
    CHECK(err <= prev_err + 1e-14);
    prev_err = err;
  }
  CHECK(prev_err < 1e-5);

  // complex rows carry the conjugate of the eigenfunction
  const auto sphere = sphere_vertex_mesh(icosphere(1));
  const auto sind = make_indicator_basis(sphere, Mode::Discrete);
  const auto sfbm = sfbm_model(3);
  const auto srow = eigen_inner_products(sphere, sind, sfbm);
  const auto& pair = sfbm.pairs()[1];
  CHECK(std::abs(srow(1, 5) - std::conj(pair(sphere.point(5)))) < 1e-14);
  CHECK_THROWS_AS(real_rows(srow), std::invalid_argument);
  CHECK(real_rows(rows).rows() == 1);
}

TEST_CASE("coefficient energy converges to the L2 norm") {
  double prev = 1.0;
  for (int p = 6; p <= 11; ++p) {
    const auto m = cell_mesh(uniform_interval_mesh(0, 1, std::size_t(1) << p));
    const auto c = project_function<double>(m, make_indicator_basis(m, Mode::Continuous),
                                            [](auto x) { return std::exp(x[0]); });
    const double err = std::abs(c.squaredNorm() - (std::exp(2.0) - 1.0) / 2.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("mode parsing") {
  CHECK(parse_mode("continuous") == Mode::Continuous);
  CHECK(parse_mode("discrete") == Mode::Discrete);
  CHECK(std::string(to_string(Mode::Discrete)) == "discrete");
  CHECK_THROWS_AS(parse_mode("other"), std::invalid_argument);
}
