#include "mlcd/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace mlcd {

Mode parse_mode(const std::string& s) {
  if (s == "continuous") {
    return Mode::Continuous;
  }
  if (s == "discrete") {
    return Mode::Discrete;
  }
  throw std::invalid_argument("unknown mode '" + s + "' (expected continuous|discrete)");
}

const char* to_string(Mode m) { return m == Mode::Continuous ? "continuous" : "discrete"; }

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) {
    f *= i;
  }
  return f;
}

Eigen::MatrixXd edge_matrix(const Eigen::MatrixXd& vertices, const Eigen::MatrixXi& simplices,
                            Eigen::Index s) {
  const Eigen::Index k = simplices.rows() - 1;
  Eigen::MatrixXd E(vertices.rows(), k);
  const auto v0 = vertices.col(simplices(0, s));
  for (Eigen::Index j = 0; j < k; ++j) {
    E.col(j) = vertices.col(simplices(j + 1, s)) - v0;
  }
  return E;
}

}  // namespace

SimplicialComplex::SimplicialComplex(Eigen::MatrixXd vertices, Eigen::MatrixXi simplices)
    : vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  const Eigen::Index d = vertices_.rows();
  const Eigen::Index k = simplices_.rows() - 1;
  if (d < 1 || k < 1 || k > d) {
    throw std::invalid_argument("SimplicialComplex: need 1 <= simplex dimension <= ambient dimension");
  }
  const Eigen::Index N = simplices_.cols();
  const Eigen::Index V = vertices_.cols();
  barycenters_.resize(d, N);
  measures_.resize(N);
  const double kfact = factorial(static_cast<int>(k));
  for (Eigen::Index s = 0; s < N; ++s) {
    std::vector<int> ids(simplices_.col(s).data(), simplices_.col(s).data() + k + 1);
    for (int id : ids) {
      if (id < 0 || id >= V) {
        throw std::invalid_argument("SimplicialComplex: vertex id out of range in simplex " +
                                    std::to_string(s));
      }
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw std::invalid_argument("SimplicialComplex: repeated vertex in simplex " + std::to_string(s));
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j <= k; ++j) {
      b += vertices_.col(simplices_(j, s));
    }
    barycenters_.col(s) = b / static_cast<double>(k + 1);
    const Eigen::MatrixXd E = edge_matrix(vertices_, simplices_, s);
    const double gram = (E.transpose() * E).determinant();
    measures_[s] = std::sqrt(std::max(gram, 0.0)) / kfact;
    if (!(measures_[s] > 0.0)) {
      throw std::invalid_argument("SimplicialComplex: degenerate simplex " + std::to_string(s));
    }
  }
  // Barycenters must be pairwise distinct.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < d; ++r) {
      if (barycenters_(r, a) != barycenters_(r, b)) {
        return barycenters_(r, a) < barycenters_(r, b);
      }
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!less(order[i - 1], order[i])) {
      throw std::invalid_argument("SimplicialComplex: simplices " + std::to_string(order[i - 1]) + " and " +
                                  std::to_string(order[i]) + " share a barycenter");
    }
  }
}

void SimplicialComplex::validate_intersections(std::size_t limit) const {
  const Eigen::Index N = simplices_.cols();
  if (static_cast<std::size_t>(N) > limit) {
    throw std::invalid_argument("validate_intersections: complex too large for the pairwise check");
  }
  const Eigen::Index d = vertices_.rows();
  const Eigen::Index k = simplices_.rows() - 1;
  Eigen::MatrixXd lo(d, N), hi(d, N);
  for (Eigen::Index s = 0; s < N; ++s) {
    lo.col(s) = vertices_.col(simplices_(0, s));
    hi.col(s) = lo.col(s);
    for (Eigen::Index j = 1; j <= k; ++j) {
      lo.col(s) = lo.col(s).cwiseMin(vertices_.col(simplices_(j, s)));
      hi.col(s) = hi.col(s).cwiseMax(vertices_.col(simplices_(j, s)));
    }
  }
  constexpr double eps = 1e-10;
  for (Eigen::Index a = 0; a < N; ++a) {
    const Eigen::MatrixXd E = edge_matrix(vertices_, simplices_, a);
    const auto qr = E.colPivHouseholderQr();
    const double scale = std::max(E.norm(), 1e-300);
    for (Eigen::Index b = 0; b < N; ++b) {
      if (a == b || ((lo.col(b).array() > hi.col(a).array() + eps).any()) ||
          ((hi.col(b).array() < lo.col(a).array() - eps).any())) {
        continue;
      }
      std::vector<int> va(simplices_.col(a).data(), simplices_.col(a).data() + k + 1);
      std::vector<int> vb(simplices_.col(b).data(), simplices_.col(b).data() + k + 1);
      std::sort(va.begin(), va.end());
      std::sort(vb.begin(), vb.end());
      if (va == vb) {
        throw std::invalid_argument("validate_intersections: duplicate simplices " + std::to_string(a) +
                                    ", " + std::to_string(b));
      }
      const Eigen::VectorXd rhs = barycenters_.col(b) - vertices_.col(simplices_(0, a));
      const Eigen::VectorXd lam = qr.solve(rhs);
      if ((E * lam - rhs).norm() > eps * scale) {
        continue;  // not in the affine hull of a
      }
      const double sum = lam.sum();
      if ((lam.array() > eps).all() && sum < 1.0 - eps) {
        throw std::invalid_argument("validate_intersections: simplices " + std::to_string(a) + " and " +
                                    std::to_string(b) + " overlap");
      }
    }
  }
}

SimplicialComplex uniform_interval_mesh(double a, double b, std::size_t N) {
  if (!(a < b)) {
    throw std::invalid_argument("uniform_interval_mesh: need a < b");
  }
  if (N < 1) {
    throw std::invalid_argument("uniform_interval_mesh: need N >= 1");
  }
  Eigen::MatrixXd v(1, static_cast<Eigen::Index>(N) + 1);
  const double h = (b - a) / static_cast<double>(N);
  for (std::size_t i = 0; i <= N; ++i) {
    v(0, static_cast<Eigen::Index>(i)) = i == N ? b : a + h * static_cast<double>(i);
  }
  Eigen::MatrixXi s(2, static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    s(0, static_cast<Eigen::Index>(i)) = static_cast<int>(i);
    s(1, static_cast<Eigen::Index>(i)) = static_cast<int>(i + 1);
  }
  return SimplicialComplex(std::move(v), std::move(s));
}

SimplicialComplex icosphere(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 8) {
    throw std::invalid_argument("icosphere: subdivisions must be in 0..8");
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) {
    v.normalize();
  }
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) {
        return it->second;
      }
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  Eigen::MatrixXd V(3, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) {
    V.col(static_cast<Eigen::Index>(i)) = verts[i];
  }
  Eigen::MatrixXi F(3, static_cast<Eigen::Index>(faces.size()));
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (int j = 0; j < 3; ++j) {
      F(j, static_cast<Eigen::Index>(i)) = faces[i][j];
    }
  }
  return SimplicialComplex(std::move(V), std::move(F));
}

Mesh cell_mesh(const SimplicialComplex& complex) {
  Mesh mesh;
  mesh.points = complex.barycenters();
  mesh.measures = complex.measures();
  const auto& V = complex.vertices();
  const auto& S = complex.simplices();
  mesh.box_lo.resize(V.rows(), S.cols());
  mesh.box_hi.resize(V.rows(), S.cols());
  for (Eigen::Index s = 0; s < S.cols(); ++s) {
    mesh.box_lo.col(s) = V.col(S(0, s));
    mesh.box_hi.col(s) = V.col(S(0, s));
    for (Eigen::Index j = 1; j < S.rows(); ++j) {
      mesh.box_lo.col(s) = mesh.box_lo.col(s).cwiseMin(V.col(S(j, s)));
      mesh.box_hi.col(s) = mesh.box_hi.col(s).cwiseMax(V.col(S(j, s)));
    }
  }
  return mesh;
}

Mesh sphere_vertex_mesh(const SimplicialComplex& complex) {
  if (complex.ambient_dim() != 3) {
    throw std::invalid_argument("sphere_vertex_mesh: complex must live in R^3");
  }
  Mesh mesh;
  mesh.points = complex.vertices();
  const double w = 4.0 * std::numbers::pi / static_cast<double>(complex.num_vertices());
  mesh.measures = Eigen::VectorXd::Constant(mesh.points.cols(), w);
  mesh.box_lo = mesh.points;
  mesh.box_hi = mesh.points;
  mesh.sphere = true;
  return mesh;
}

IndicatorBasis make_indicator_basis(const Mesh& mesh, Mode mode) {
  IndicatorBasis basis;
  basis.mode = mode;
  if (mode == Mode::Discrete) {
    basis.normalizers = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.size()));
  } else {
    basis.normalizers = mesh.measures.cwiseSqrt().cwiseInverse();
  }
  return basis;
}

Matrix<cdouble> eigen_inner_products(const Mesh& mesh, const IndicatorBasis& basis,
                                     const EigenModel& model, std::span<const std::size_t> cells) {
  const auto M = static_cast<Eigen::Index>(model.size());
  Matrix<cdouble> rows(M, static_cast<Eigen::Index>(cells.size()));
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const std::size_t cell = cells[j];
    if (cell >= mesh.size()) {
      throw std::invalid_argument("eigen_inner_products: cell index out of range");
    }
    const auto x = mesh.point(cell);
    const double w = basis.weight(cell);
    for (Eigen::Index i = 0; i < M; ++i) {
      rows(i, static_cast<Eigen::Index>(j)) = std::conj(model.pairs()[static_cast<std::size_t>(i)](x)) * w;
    }
  }
  return rows;
}

Matrix<cdouble> eigen_inner_products(const Mesh& mesh, const IndicatorBasis& basis,
                                     const EigenModel& model) {
  std::vector<std::size_t> all(mesh.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return eigen_inner_products(mesh, basis, model, all);
}

Eigen::MatrixXd real_rows(const Matrix<cdouble>& rows) {
  if (rows.size() > 0 && rows.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("real_rows: eigenfunctions are complex-valued; build a complex basis");
  }
  return rows.real();
}

}  // namespace mlcd
