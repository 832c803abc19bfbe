#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlcd/types.hpp"

namespace mlcd {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
struct UnitSphere {};
using DomainDescriptor = std::variant<Interval, UnitSphere>;

bool domain_contains(const DomainDescriptor& domain, std::span<const double> point);

/// Law of the uncorrelated KL coefficients Y_k. `Zero` is a degenerate law
/// used to pin realizations to the mean.
enum class CoefficientLaw { StandardNormal, UniformSqrt3, Zero };

using EigenFunction = std::function<cdouble(std::span<const double>)>;

struct EigenPair {
  int index = 1;  // 1-based
  double eigenvalue = 0.0;
  EigenFunction function;
  // Squared L2 norm of `function` on the model domain (1 for orthonormal families).
  double norm_sq = 1.0;
  std::string label;

  cdouble operator()(std::span<const double> x) const { return function(x); }
};

/// Weighted spectrum entry lambda_k * ||phi_k||^2 for 1-based k; used for tail sums
/// of analytic models past the stored truncation.
using SpectrumFn = std::function<double(std::size_t)>;
/// Estimate of sum_{k > K} spectrum(k).
using RemainderFn = std::function<double(std::size_t)>;

class EigenModel {
 public:
  EigenModel() = default;
  EigenModel(std::string name, DomainDescriptor domain, std::vector<EigenPair> pairs, Field field,
             CoefficientLaw law);

  const std::string& name() const { return name_; }
  const DomainDescriptor& domain() const { return domain_; }
  const std::vector<EigenPair>& pairs() const { return pairs_; }
  const EigenPair& pair(std::size_t k1) const { return pairs_.at(k1 - 1); }
  std::size_t size() const { return pairs_.size(); }
  Field field() const { return field_; }
  CoefficientLaw law() const { return law_; }

  void set_law(CoefficientLaw law) { law_ = law; }
  void set_mean(EigenFunction mean) { mean_ = std::move(mean); }
  bool has_mean() const { return static_cast<bool>(mean_); }
  cdouble mean(std::span<const double> x) const { return mean_ ? mean_(x) : cdouble{0.0}; }

  void set_spectrum(SpectrumFn spectrum, RemainderFn remainder) {
    spectrum_ = std::move(spectrum);
    remainder_ = std::move(remainder);
  }
  bool analytic() const { return static_cast<bool>(spectrum_); }
  double spectrum(std::size_t k1) const;
  double remainder(std::size_t k) const { return remainder_ ? remainder_(k) : 0.0; }

  /// Same model restricted to its first M pairs; spectrum and mean are kept.
  EigenModel truncated(std::size_t M) const;

 private:
  std::string name_;
  DomainDescriptor domain_;
  std::vector<EigenPair> pairs_;
  Field field_ = Field::Real;
  CoefficientLaw law_ = CoefficientLaw::StandardNormal;
  EigenFunction mean_;
  SpectrumFn spectrum_;
  RemainderFn remainder_;
};

// --- Brownian motion on [0, 1] ----------------------------------------------

EigenPair brownian_eigenpair(int k);
double brownian_eigenvalue(int k);
EigenModel brownian_model(std::size_t M);

// --- Squared-exponential covariance expansion --------------------------------

struct GaussParams {
  double Lp = 1.0;   // period length of the sine/cosine family
  double L = 0.01;   // L_c / L_p
  double tau = 1.0;  // domain is [0, tau]
};

/// L_p = max{tau, 2 L_c}, L = L_c / L_p.
GaussParams gauss_params(double Lc, double tau);

/// Expansion with a constant first mode, sine (even k) / cosine (odd k) modes
/// and coefficients uniform on [-sqrt3, sqrt3]. Mean function is 1.
EigenModel gauss_model(std::size_t M, double Lc, double tau);
EigenModel gauss_model(std::size_t M, const GaussParams& params);

// --- Tail sums ---------------------------------------------------------------

struct TailSum {
  double value = 0.0;
  // Integral-comparison bound on the part beyond the summation cutoff.
  double remainder_bound = 0.0;
  std::size_t cutoff = 0;
};

/// sum_{j > M} eigenvalues[j-1] for a finite non-increasing list.
double truncation_tail(std::span<const double> eigenvalues, std::size_t M);

/// Tail of a model. Analytic models are summed to `cutoff` terms plus a
/// remainder estimate; otherwise the stored pairs are summed.
TailSum truncation_tail(const EigenModel& model, std::size_t M, std::size_t cutoff = 100000);

/// Smallest M with t_M <= tol, capped at max_modes.
std::size_t choose_truncation(const EigenModel& model, double tol, std::size_t max_modes);

// --- Realizations ------------------------------------------------------------

/// Independent stream for mode k (1-based) derived from the master seed.
std::uint64_t mode_seed(std::uint64_t seed, std::size_t k);

/// Coefficients Y_1..Y_M drawn per the model law, one substream per mode.
Eigen::VectorXd draw_coefficients(const EigenModel& model, std::uint64_t seed);

/// mean + sum_k sqrt(lambda_k) phi_k(x) Y_k at each column of `points`.
Vector<cdouble> evaluate_realization(const EigenModel& model, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& coefficients);

Vector<cdouble> sample_realization(const EigenModel& model, const Eigen::MatrixXd& points,
                                   std::uint64_t seed);

/// Real-valued convenience wrapper; rejects complex models.
Eigen::VectorXd sample_realization_real(const EigenModel& model, const Eigen::MatrixXd& points,
                                        std::uint64_t seed);

// --- Spherical fractional Brownian motion ------------------------------------

struct SfbmSpectrum {
  int l_max = 0;
  std::vector<double> d;        // d_0 .. d_lmax
  std::vector<bool> vanishing;  // |d_l| <= tolerance
  int quadrature_order = 0;
  double tolerance = 1e-10;
};

/// d_l = int_{-1}^{1} arccos(x) P_l(x) dx. Integrated in the angle variable
/// x = cos(theta), where the integrand theta sin(theta) P_l(cos theta) is smooth.
SfbmSpectrum sfbm_spectrum(int l_max, int quadrature_order = 0, double tolerance = 1e-10);

struct SfbmModeCount {
  // (l, m) modes with non-vanishing d_l, l = 0..l_max.
  std::size_t nonvanishing = 0;
  // Same, minus the l = 0 mode (identically zero after the pole shift).
  std::size_t retained = 0;
};
SfbmModeCount sfbm_mode_counts(const SfbmSpectrum& spectrum);

/// Colatitude/longitude of a unit vector; longitude in [0, 2 pi).
std::pair<double, double> sphere_angles(std::span<const double> p);

EigenModel sfbm_model(int l_max, double tolerance = 1e-10);
EigenModel sfbm_model(const SfbmSpectrum& spectrum);

// --- Method of snapshots -----------------------------------------------------

struct DiscreteEigenpairs {
  Eigen::VectorXd eigenvalues;  // non-increasing
  Eigen::MatrixXd vectors;      // N x M, orthonormal columns
};

/// Top-M eigenpairs of the empirical covariance of the columns of `samples`
/// (N cells x S samples). The mean sample is removed first; covariance uses 1/S.
DiscreteEigenpairs snapshot_eigenpairs(const Eigen::MatrixXd& samples, std::size_t M);

}  // namespace mlcd
