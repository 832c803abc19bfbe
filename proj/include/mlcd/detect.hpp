#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlcd/kl_models.hpp"
#include "mlcd/mesh.hpp"
#include "mlcd/transform.hpp"

namespace mlcd {

// --- Regions -----------------------------------------------------------------

struct IntervalRegion {
  double lo = 0.0;
  double hi = 1.0;
};
struct BoxRegion {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};
/// Spherical cap of angular radius `angle` around the unit vector `center`.
struct CapRegion {
  Eigen::Vector3d center;
  double angle = 0.0;
};
using Region = std::variant<IntervalRegion, BoxRegion, CapRegion>;

/// "interval:lo,hi" | "box:lo0,lo1,..;hi0,hi1,.." | "cap:theta,phi,angle"
Region parse_region(const std::string& text);
std::string format_region(const Region& region);

bool region_contains(const Region& region, std::span<const double> point);

/// Region plus the fine cells whose sample point lies inside it.
struct SupportQuery {
  Region region;
  std::vector<std::size_t> cells;
};
SupportQuery resolve_region(const Region& region, const Eigen::MatrixXd& cell_points);

// --- Global detector ---------------------------------------------------------

/// Sum of squared moduli of the detail coefficients (root scaling excluded).
template <typename Scalar>
double global_energy(const MultilevelCoefficients<Scalar>& mc) {
  return mc.detail_energy();
}

struct EnergyInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool unbounded = false;  // t_M >= 1/2
};

/// Range of ||w||^2 consistent with
///   ||w||^2 (1 - 2 t_M) + t_M <= S <= ||w||^2 (1 + 2 t_M) + t_M,
/// clamped below at zero.
EnergyInterval energy_interval(double S, double t_M);

// --- Local detector ----------------------------------------------------------

struct LocalizationEntry {
  int level = 0;
  std::size_t id = 0;  // global function id
  int node = 0;
  int local = 0;
  cdouble value{};
  double abs_d = 0.0;
  std::size_t support_cells = 0;
  Eigen::VectorXd support_lo;
  Eigen::VectorXd support_hi;
  Eigen::VectorXd centroid;
};

/// Detail coefficients with |d| > epsilon, restricted to functions whose
/// support meets `region` when given. Sorted by level, then |d| descending.
template <typename Scalar>
std::vector<LocalizationEntry> localize(const MultilevelBasis<Scalar>& basis,
                                        const MultilevelCoefficients<Scalar>& mc, double epsilon,
                                        const SupportQuery* region = nullptr);

struct DetectionReport {
  double S = 0.0;
  EnergyInterval interval;
  double t_M = 0.0;
  double epsilon = 0.0;
  std::string mode;
  std::string field;
  std::size_t cells = 0;
  std::size_t modes = 0;
  int levels = 0;
  std::optional<std::string> region;
  std::vector<LocalizationEntry> entries;

  bool detected() const { return !entries.empty(); }
};

template <typename Scalar>
DetectionReport detect(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc,
                       double t_M, double epsilon, Mode mode, const SupportQuery* region = nullptr);

// --- Monte Carlo moments -----------------------------------------------------

struct MomentStats {
  std::size_t trials = 0;
  Eigen::VectorXd abs_mean;        // |E d| per detail coefficient
  Eigen::VectorXd second_moment;   // E |d|^2 per detail coefficient
  Eigen::VectorXd second_moment_se;
  double max_abs_mean = 0.0;
  double max_std = 0.0;
  double max_second_moment = 0.0;
  double max_second_moment_se = 0.0;  // standard error at the argmax
  std::size_t argmax = 0;
  double energy_mean = 0.0;  // mean of S over trials
  double energy_se = 0.0;
};

/// Projects zero-mean realizations of `full` (plus an optional fixed fine
/// coefficient vector) through the basis and accumulates per-coefficient
/// moments. Trials use independent seeds derived from `seed` and are reduced
/// in trial order.
template <typename Scalar>
MomentStats coefficient_moments(const EigenModel& full, const Mesh& mesh, const IndicatorBasis& indicators,
                                const MultilevelBasis<Scalar>& basis, std::size_t trials, std::uint64_t seed,
                                const Vector<Scalar>* offset = nullptr);

}  // namespace mlcd
