#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlcd/detect.hpp"
#include "mlcd/kdtree.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/mesh.hpp"
#include "mlcd/mlb.hpp"

namespace mlcd {

struct ModelSpec {
  std::string type = "brownian";  // brownian | gauss | sfbm | snapshot
  std::optional<std::size_t> modes;
  std::optional<double> tail_tol;       // smallest M with t_M <= tail_tol (default 1e-4)
  std::optional<std::size_t> max_modes;  // cap for tail_tol (default n0 - 1)
  std::optional<std::string> law;        // normal | uniform | zero
  double Lc = 0.01;
  double tau = 1.0;
  std::optional<double> Lp;
  std::optional<double> L;
  int l_max = 10;
  std::string samples;  // snapshot CSV, one realization per row
};

struct MeshSpec {
  std::string type = "interval";  // interval | icosphere | files
  double a = 0.0;
  double b = 1.0;
  std::size_t cells = 500;
  int subdivisions = 5;
  std::string vertices;
  std::string simplices;
};

/// w(x) = amplitude * exp(-|x - center|^2 / sigma^2), restricted to `support`.
/// On the sphere the center and distance use (theta, phi).
struct BumpSpec {
  double amplitude = 0.05;
  std::vector<double> center{0.5};
  double sigma = 0.031622776601683791;
  std::optional<std::string> support;
};

struct RunConfig {
  ModelSpec model;
  MeshSpec mesh;
  std::optional<std::size_t> n0;
  std::optional<int> levels;  // n; sets n0 = ceil(N / 2^(n-1)) when n0 is absent
  Mode mode = Mode::Discrete;
  double rank_tol = kDefaultRankTol;
  std::optional<double> epsilon;
  double epsilon_relative = 0.0;  // epsilon = epsilon_relative * ||u|| when epsilon is absent
  std::optional<std::string> region;
  std::optional<double> t_M;
  std::optional<BumpSpec> bump;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string basis;   // archive prefix for detect
  std::string signal;  // signal CSV for detect
};

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr double kDefaultTailTol = 1e-4;

/// Relative paths are resolved against `base`. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& value, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);
/// Range and file-existence checks; throws std::invalid_argument.
void validate_config(const RunConfig& config);

/// Mesh, model and tree parameters resolved from a RunConfig.
struct Problem {
  RunConfig config;
  std::optional<SimplicialComplex> complex;
  Mesh mesh;
  IndicatorBasis indicators;
  std::optional<EigenModel> model;  // truncated analytic model
  std::optional<DiscreteEigenpairs> snapshot;
  Eigen::VectorXd snapshot_mean;
  std::size_t n0 = 16;
  std::size_t modes = 0;
  double t_M = 0.0;
  Field field = Field::Real;

  std::vector<double> eigenvalues() const;
  /// M x N table of <phi_i, chi_j>.
  Matrix<cdouble> rows() const;
  KdTree tree() const;
  template <typename Scalar>
  MultilevelBasis<Scalar> build(const KdTree& tree) const;
  /// Cell values of one realization of the truncated model, mean included.
  Vector<cdouble> simulate(std::uint64_t seed) const;
  /// Cell values of the configured bump (zero without one).
  Vector<cdouble> bump_values() const;
  /// Fine coefficients of cell values.
  Vector<cdouble> project(const Vector<cdouble>& values) const;
  std::optional<SupportQuery> region() const;
};

Problem assemble(const RunConfig& config);

std::size_t n0_for_levels(std::size_t cells, int levels);

}  // namespace mlcd
