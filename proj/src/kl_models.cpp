#include "mlcd/kl_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "mlcd/legendre.hpp"
#include "mlcd/quadrature.hpp"

namespace mlcd {

namespace {

constexpr double kPi = std::numbers::pi;

double point_x(std::span<const double> p) { return p.empty() ? 0.0 : p[0]; }

}  // namespace

bool domain_contains(const DomainDescriptor& domain, std::span<const double> point) {
  constexpr double slack = 1e-12;
  if (const auto* iv = std::get_if<Interval>(&domain)) {
    if (point.size() != 1) {
      return false;
    }
    return point[0] >= iv->lo - slack && point[0] <= iv->hi + slack;
  }
  if (point.size() != 3) {
    return false;
  }
  const double r = std::sqrt(point[0] * point[0] + point[1] * point[1] + point[2] * point[2]);
  return std::abs(r - 1.0) <= 1e-9;
}

EigenModel::EigenModel(std::string name, DomainDescriptor domain, std::vector<EigenPair> pairs,
                       Field field, CoefficientLaw law)
    : name_(std::move(name)), domain_(domain), pairs_(std::move(pairs)), field_(field), law_(law) {
  if (pairs_.empty()) {
    throw std::invalid_argument("EigenModel: at least one eigenpair is required");
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].index != static_cast<int>(i) + 1) {
      throw std::invalid_argument("EigenModel: eigenpairs must be indexed 1..M contiguously");
    }
    if (pairs_[i].eigenvalue < 0.0) {
      throw std::invalid_argument("EigenModel: negative eigenvalue");
    }
  }
}

double EigenModel::spectrum(std::size_t k1) const {
  if (spectrum_) {
    return spectrum_(k1);
  }
  if (k1 == 0 || k1 > pairs_.size()) {
    return 0.0;
  }
  const auto& p = pairs_[k1 - 1];
  return p.eigenvalue * p.norm_sq;
}

EigenModel EigenModel::truncated(std::size_t M) const {
  if (M == 0 || M > pairs_.size()) {
    throw std::invalid_argument("EigenModel::truncated: M must be in 1..size()");
  }
  EigenModel out = *this;
  out.pairs_.resize(M);
  return out;
}

// --- Brownian ----------------------------------------------------------------

double brownian_eigenvalue(int k) {
  if (k < 1) {
    throw std::invalid_argument("brownian_eigenpair: k must be >= 1");
  }
  const double odd = 2.0 * k - 1.0;
  return 4.0 / (odd * odd * kPi * kPi);
}

EigenPair brownian_eigenpair(int k) {
  EigenPair pair;
  pair.index = k;
  pair.eigenvalue = brownian_eigenvalue(k);
  const double freq = (k - 0.5) * kPi;
  pair.function = [freq](std::span<const double> p) {
    return cdouble{std::numbers::sqrt2 * std::sin(freq * point_x(p))};
  };
  pair.label = "k=" + std::to_string(k);
  return pair;
}

EigenModel brownian_model(std::size_t M) {
  if (M < 1) {
    throw std::invalid_argument("brownian_model: M must be >= 1");
  }
  std::vector<EigenPair> pairs;
  pairs.reserve(M);
  for (std::size_t k = 1; k <= M; ++k) {
    pairs.push_back(brownian_eigenpair(static_cast<int>(k)));
  }
  EigenModel model("brownian", Interval{0.0, 1.0}, std::move(pairs), Field::Real,
                   CoefficientLaw::StandardNormal);
  model.set_spectrum([](std::size_t k) { return brownian_eigenvalue(static_cast<int>(k)); },
                     // midpoint estimate of sum_{k>K}: integral from K + 1/2
                     [](std::size_t K) { return 1.0 / (kPi * kPi * static_cast<double>(K)); });
  return model;
}

// --- Gauss -------------------------------------------------------------------

GaussParams gauss_params(double Lc, double tau) {
  if (!(Lc > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("gauss_model: L_c and tau must be positive");
  }
  GaussParams p;
  p.tau = tau;
  p.Lp = std::max(tau, 2.0 * Lc);
  p.L = Lc / p.Lp;
  return p;
}

EigenModel gauss_model(std::size_t M, double Lc, double tau) {
  return gauss_model(M, gauss_params(Lc, tau));
}

namespace {

double gauss_eigenvalue(std::size_t k, const GaussParams& p) {
  if (k == 1) {
    return std::sqrt(kPi) * p.L / 2.0;
  }
  const double j = static_cast<double>(k / 2);
  const double a = j * kPi * p.L;
  return std::sqrt(kPi) * p.L * std::exp(-a * a / 4.0);
}

double gauss_norm_sq(std::size_t k, const GaussParams& p) {
  if (k == 1) {
    return p.tau;
  }
  const double j = static_cast<double>(k / 2);
  const double w = 2.0 * j * kPi / p.Lp;
  const double osc = std::sin(w * p.tau) / (2.0 * w);
  return (k % 2 == 0) ? p.tau / 2.0 - osc : p.tau / 2.0 + osc;
}

}  // namespace

EigenModel gauss_model(std::size_t M, const GaussParams& params) {
  if (M < 1) {
    throw std::invalid_argument("gauss_model: M must be >= 1");
  }
  if (!(params.Lp > 0.0) || !(params.L > 0.0) || !(params.tau > 0.0)) {
    throw std::invalid_argument("gauss_model: L_p, L and tau must be positive");
  }
  std::vector<EigenPair> pairs;
  pairs.reserve(M);
  for (std::size_t k = 1; k <= M; ++k) {
    EigenPair pair;
    pair.index = static_cast<int>(k);
    pair.eigenvalue = gauss_eigenvalue(k, params);
    pair.norm_sq = gauss_norm_sq(k, params);
    const double freq = static_cast<double>(k / 2) * kPi / params.Lp;
    if (k == 1) {
      pair.function = [](std::span<const double>) { return cdouble{1.0}; };
    } else if (k % 2 == 0) {
      pair.function = [freq](std::span<const double> x) { return cdouble{std::sin(freq * point_x(x))}; };
    } else {
      pair.function = [freq](std::span<const double> x) { return cdouble{std::cos(freq * point_x(x))}; };
    }
    pair.label = "k=" + std::to_string(k);
    pairs.push_back(std::move(pair));
  }
  EigenModel model("gauss", Interval{0.0, params.tau}, std::move(pairs), Field::Real,
                   CoefficientLaw::UniformSqrt3);
  model.set_mean([](std::span<const double>) { return cdouble{1.0}; });
  model.set_spectrum(
      [params](std::size_t k) { return gauss_eigenvalue(k, params) * gauss_norm_sq(k, params); },
      [params](std::size_t K) {
        // sum over j > K/2 of 2 sqrt(pi) L exp(-(j pi L)^2/4) tau/2 <= tau erfc(J pi L / 2)
        const double J = std::floor(static_cast<double>(K) / 2.0);
        return params.tau * std::erfc(J * kPi * params.L / 2.0);
      });
  return model;
}

// --- Tail sums ---------------------------------------------------------------

double truncation_tail(std::span<const double> eigenvalues, std::size_t M) {
  if (M > eigenvalues.size()) {
    throw std::invalid_argument("truncation_tail: M exceeds the number of eigenvalues");
  }
  double sum = 0.0;
  for (std::size_t j = eigenvalues.size(); j > M; --j) {
    sum += eigenvalues[j - 1];
  }
  return sum;
}

TailSum truncation_tail(const EigenModel& model, std::size_t M, std::size_t cutoff) {
  TailSum tail;
  if (!model.analytic()) {
    if (M > model.size()) {
      throw std::invalid_argument("truncation_tail: M exceeds the model size");
    }
    std::vector<double> ev;
    for (std::size_t k = 1; k <= model.size(); ++k) {
      ev.push_back(model.spectrum(k));
    }
    tail.value = truncation_tail(ev, M);
    tail.cutoff = model.size();
    return tail;
  }
  const std::size_t K = std::max(cutoff, M);
  double sum = 0.0;
  for (std::size_t k = K; k > M; --k) {
    sum += model.spectrum(k);
  }
  const double rem = model.remainder(K);
  tail.value = sum + rem;
  tail.remainder_bound = rem + model.spectrum(K + 1);
  tail.cutoff = K;
  return tail;
}

std::size_t choose_truncation(const EigenModel& model, double tol, std::size_t max_modes) {
  if (max_modes < 1) {
    throw std::invalid_argument("choose_truncation: max_modes must be >= 1");
  }
  if (!model.analytic()) {
    max_modes = std::min(max_modes, model.size());
  }
  // The tail is non-increasing, so bisect on M.
  std::size_t lo = 1;
  std::size_t hi = max_modes;
  if (truncation_tail(model, hi).value > tol) {
    return max_modes;
  }
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (truncation_tail(model, mid).value <= tol) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// --- Realizations ------------------------------------------------------------

std::uint64_t mode_seed(std::uint64_t seed, std::size_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), 0x6b6c6d64u};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::VectorXd draw_coefficients(const EigenModel& model, std::uint64_t seed) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(model.size()));
  for (std::size_t k = 1; k <= model.size(); ++k) {
    std::mt19937_64 gen(mode_seed(seed, k));
    double v = 0.0;
    switch (model.law()) {
      case CoefficientLaw::StandardNormal:
        v = std::normal_distribution<double>(0.0, 1.0)(gen);
        break;
      case CoefficientLaw::UniformSqrt3:
        v = std::uniform_real_distribution<double>(-std::sqrt(3.0), std::sqrt(3.0))(gen);
        break;
      case CoefficientLaw::Zero:
        break;
    }
    y[static_cast<Eigen::Index>(k - 1)] = v;
  }
  return y;
}

Vector<cdouble> evaluate_realization(const EigenModel& model, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& coefficients) {
  if (static_cast<std::size_t>(coefficients.size()) != model.size()) {
    throw std::invalid_argument("evaluate_realization: coefficient count must equal M");
  }
  Vector<cdouble> out(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    std::span<const double> x(points.col(j).data(), static_cast<std::size_t>(points.rows()));
    if (!domain_contains(model.domain(), x)) {
      throw std::invalid_argument("sample_realization: point outside the model domain");
    }
    cdouble v = model.mean(x);
    for (std::size_t k = 0; k < model.size(); ++k) {
      const double y = coefficients[static_cast<Eigen::Index>(k)];
      if (y == 0.0) {
        continue;
      }
      const auto& pair = model.pairs()[k];
      v += std::sqrt(pair.eigenvalue) * y * pair(x);
    }
    out[j] = v;
  }
  return out;
}

Vector<cdouble> sample_realization(const EigenModel& model, const Eigen::MatrixXd& points,
                                   std::uint64_t seed) {
  return evaluate_realization(model, points, draw_coefficients(model, seed));
}

Eigen::VectorXd sample_realization_real(const EigenModel& model, const Eigen::MatrixXd& points,
                                        std::uint64_t seed) {
  if (model.field() != Field::Real) {
    throw std::invalid_argument("sample_realization_real: model is complex-valued");
  }
  return sample_realization(model, points, seed).real();
}

// --- SFBM --------------------------------------------------------------------

SfbmSpectrum sfbm_spectrum(int l_max, int quadrature_order, double tolerance) {
  if (l_max < 1) {
    throw std::invalid_argument("sfbm_spectrum: l_max must be positive");
  }
  SfbmSpectrum spec;
  spec.l_max = l_max;
  spec.tolerance = tolerance;
  spec.quadrature_order = quadrature_order > 0 ? quadrature_order : std::max(4 * l_max, 8);
  spec.d.assign(static_cast<std::size_t>(l_max) + 1, 0.0);
  const auto rule = gauss_legendre(spec.quadrature_order, 0.0, kPi);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double theta = rule.nodes[q];
    const double w = rule.weights[q] * theta * std::sin(theta);
    const auto p = legendre_all(l_max, std::cos(theta));
    for (int l = 0; l <= l_max; ++l) {
      spec.d[l] += w * p[l];
    }
  }
  spec.vanishing.resize(spec.d.size());
  for (std::size_t l = 0; l < spec.d.size(); ++l) {
    spec.vanishing[l] = std::abs(spec.d[l]) <= tolerance;
  }
  return spec;
}

SfbmModeCount sfbm_mode_counts(const SfbmSpectrum& spectrum) {
  SfbmModeCount count;
  for (int l = 0; l <= spectrum.l_max; ++l) {
    if (spectrum.vanishing[l]) {
      continue;
    }
    count.nonvanishing += 2 * static_cast<std::size_t>(l) + 1;
    if (l > 0) {
      count.retained += 2 * static_cast<std::size_t>(l) + 1;
    }
  }
  return count;
}

std::pair<double, double> sphere_angles(std::span<const double> p) {
  const double theta = std::acos(std::clamp(p[2], -1.0, 1.0));
  double phi = std::atan2(p[1], p[0]);
  if (phi < 0.0) {
    phi += 2.0 * kPi;
  }
  return {theta, phi};
}

EigenModel sfbm_model(int l_max, double tolerance) {
  return sfbm_model(sfbm_spectrum(l_max, 0, tolerance));
}

EigenModel sfbm_model(const SfbmSpectrum& spectrum) {
  std::vector<EigenPair> pairs;
  const double tol = spectrum.tolerance;
  for (int l = 1; l <= spectrum.l_max; ++l) {
    if (spectrum.vanishing[l]) {
      continue;
    }
    const double arg = -kPi * spectrum.d[l];
    if (arg < -tol) {
      throw ModelError("sfbm_model: negative variance -pi d_l for l = " + std::to_string(l));
    }
    const double lambda = std::max(arg, 0.0);
    for (int m = -l; m <= l; ++m) {
      EigenPair pair;
      pair.index = static_cast<int>(pairs.size()) + 1;
      pair.eigenvalue = lambda;
      const cdouble pole = spherical_harmonic(l, m, 0.0, 0.0);
      pair.norm_sq = 1.0 + 4.0 * kPi * std::norm(pole);
      pair.function = [l, m, pole](std::span<const double> x) {
        const auto [theta, phi] = sphere_angles(x);
        return spherical_harmonic(l, m, theta, phi) - pole;
      };
      pair.label = "l=" + std::to_string(l) + ",m=" + std::to_string(m);
      pairs.push_back(std::move(pair));
    }
  }
  if (pairs.empty()) {
    throw ModelError("sfbm_model: no retained modes");
  }
  EigenModel model("sfbm", UnitSphere{}, std::move(pairs), Field::Complex,
                   CoefficientLaw::StandardNormal);

  // Spectrum past l_max for tail sums: per-mode weights grouped by degree.
  const int l_tail = std::max(8 * spectrum.l_max, 64);
  const auto ext = sfbm_spectrum(l_tail, 4 * l_tail, tol);
  std::vector<double> weights;  // weighted eigenvalue per retained mode, all degrees <= l_tail
  for (int l = 1; l <= l_tail; ++l) {
    if (ext.vanishing[l]) {
      continue;
    }
    const double lambda = std::max(-kPi * ext.d[l], 0.0);
    for (int m = -l; m <= l; ++m) {
      const double shift = m == 0 ? (2.0 * l + 1.0) : 0.0;  // 4 pi |Y_l^0(0,0)|^2
      weights.push_back(lambda * (1.0 + shift));
    }
  }
  // |d_l| ~ C / l^3 for odd l; per degree weight ~ pi C (2l+1)(1 + ...) / l^3.
  int last_odd = l_tail % 2 == 1 ? l_tail : l_tail - 1;
  const double c_fit = std::abs(ext.d[last_odd]) * std::pow(last_odd, 3);
  model.set_spectrum(
      [weights](std::size_t k) { return k >= 1 && k <= weights.size() ? weights[k - 1] : 0.0; },
      [weights, c_fit, last_odd](std::size_t K) {
        double rem = 0.0;
        for (std::size_t k = K + 1; k <= weights.size(); ++k) {
          rem += weights[k - 1];
        }
        // odd degrees past the table: per-degree weight ~ 4 pi C / l^2
        rem += 2.0 * kPi * c_fit / static_cast<double>(last_odd);
        return rem;
      });
  return model;
}

// --- Snapshots ---------------------------------------------------------------

DiscreteEigenpairs snapshot_eigenpairs(const Eigen::MatrixXd& samples, std::size_t M) {
  const Eigen::Index S = samples.cols();
  const Eigen::Index N = samples.rows();
  if (M < 1 || static_cast<Eigen::Index>(M) > S) {
    throw std::invalid_argument("snapshot_eigenpairs: need at least M samples");
  }
  if (static_cast<Eigen::Index>(M) > N) {
    throw std::invalid_argument("snapshot_eigenpairs: M exceeds the number of cells");
  }
  const Eigen::VectorXd mean = samples.rowwise().mean();
  const Eigen::MatrixXd X = samples.colwise() - mean;
  const double inv_s = 1.0 / static_cast<double>(S);

  DiscreteEigenpairs out;
  out.eigenvalues.resize(static_cast<Eigen::Index>(M));
  out.vectors.resize(N, static_cast<Eigen::Index>(M));
  if (S <= N) {
    // Snapshot Gram matrix K = X^T X / S; phi = X u / sqrt(S mu).
    const Eigen::MatrixXd K = (X.transpose() * X) * inv_s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(M); ++i) {
      const Eigen::Index src = S - 1 - i;
      const double mu = std::max(eig.eigenvalues()[src], 0.0);
      out.eigenvalues[i] = mu;
      Eigen::VectorXd v = X * eig.eigenvectors().col(src);
      const double nrm = v.norm();
      if (nrm > 0.0) {
        v /= nrm;
      }
      out.vectors.col(i) = v;
    }
  } else {
    // More snapshots than cells: the N x N covariance has the same non-zero spectrum.
    const Eigen::MatrixXd C = (X * X.transpose()) * inv_s;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(M); ++i) {
      const Eigen::Index src = N - 1 - i;
      out.eigenvalues[i] = std::max(eig.eigenvalues()[src], 0.0);
      out.vectors.col(i) = eig.eigenvectors().col(src);
    }
  }
  // Zero-variance directions from the Gram route are not orthonormal; re-orthonormalize.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.vectors);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, static_cast<Eigen::Index>(M));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(M); ++i) {
    // keep the sign of the original vector
    const double s = Q.col(i).dot(out.vectors.col(i)) < 0.0 ? -1.0 : 1.0;
    out.vectors.col(i) = s * Q.col(i);
  }
  return out;
}

}  // namespace mlcd
