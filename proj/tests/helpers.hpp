#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mlcd/mesh.hpp"
#include "mlcd/types.hpp"

namespace testing {

/// Cell table over random points in [0,1]^d (measure 1, point boxes).
inline mlcd::Mesh random_point_mesh(std::size_t N, int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  mlcd::Mesh m;
  m.points.resize(d, static_cast<Eigen::Index>(N));
  for (Eigen::Index j = 0; j < m.points.cols(); ++j) {
    for (int a = 0; a < d; ++a) {
      m.points(a, j) = U(gen);
    }
  }
  m.measures = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(N));
  m.box_lo = m.points;
  m.box_hi = m.points;
  return m;
}

template <typename Scalar>
mlcd::Matrix<Scalar> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> G(0.0, 1.0);
  mlcd::Matrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      if constexpr (std::is_same_v<Scalar, double>) {
        m(i, j) = G(gen);
      } else {
        const double re = G(gen);
        m(i, j) = Scalar(re, G(gen));
      }
    }
  }
  return m;
}

/// Fresh directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mlcd_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing
