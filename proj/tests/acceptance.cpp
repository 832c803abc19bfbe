// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mlcd/demo.hpp"
#include "mlcd/detect.hpp"
#include "mlcd/kdtree.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/mesh.hpp"
#include "mlcd/mlb.hpp"
#include "mlcd/transform.hpp"

using namespace mlcd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string& summary) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, summary.c_str());
  std::fflush(stdout);
  if (!ok) {
    ++failures;
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[2048];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <typename Scalar>
Matrix<Scalar> random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> G(0.0, 1.0);
  Matrix<Scalar> m(rows, cols);
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

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// 1 and 2: orthonormality and dimension identity over random configurations

struct ConfigOutcome {
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t n0 = 0;
  bool sphere = false;
  bool complex = false;
  double gram = 0.0;
  double leak = 0.0;
  bool dims_sum = false;
  bool full_rank = false;
  bool root_is_M = true;
};

template <typename Scalar>
ConfigOutcome check_config(const Mesh& mesh, const Matrix<Scalar>& rows, std::size_t n0) {
  ConfigOutcome o;
  o.N = mesh.size();
  o.M = static_cast<std::size_t>(rows.rows());
  o.n0 = n0;
  o.sphere = mesh.sphere;
  o.complex = !std::is_same_v<Scalar, double>;
  const auto basis = build_basis<Scalar>(make_tree(mesh.points, n0), mesh, rows);
  const Matrix<Scalar> Q = densify_all(basis);
  const Matrix<Scalar> G = Q.adjoint() * Q;
  o.gram = (G - Matrix<Scalar>::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  const auto root = static_cast<Eigen::Index>(basis.root_dim());
  if (basis.detail_count() > 0) {
    o.leak = (rows * Q.rightCols(Q.cols() - root)).cwiseAbs().maxCoeff();
  }
  std::size_t total = basis.root_dim();
  for (int l = 0; l < basis.levels(); ++l) {
    total += basis.level_dim(l);
  }
  o.dims_sum = total == o.N;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(rows);
  const auto& sv = svd.singularValues();
  o.full_rank = sv.size() > 0 && sv.minCoeff() > basis.rank_tol() * sv.maxCoeff();
  if (o.full_rank) {
    o.root_is_M = basis.root_dim() == o.M;
  }
  return o;
}

void criteria_1_and_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240101);
  std::vector<ConfigOutcome> outcomes;
  const std::size_t configs = 50;
  for (std::size_t c = 0; c < configs; ++c) {
    const bool sphere = c % 3 == 2;
    const std::size_t M = std::uniform_int_distribution<std::size_t>(1, 8)(gen);
    const std::size_t n0 = std::uniform_int_distribution<std::size_t>(2, 32)(gen);
    const bool model_rows = c % 2 == 0;
    if (sphere) {
      const int subdiv = std::uniform_int_distribution<int>(1, 4)(gen);
      const Mesh mesh = sphere_vertex_mesh(icosphere(subdiv));
      const IndicatorBasis ind = make_indicator_basis(mesh, c % 4 == 0 ? Mode::Discrete : Mode::Continuous);
      const Matrix<cdouble> rows = model_rows
                                       ? eigen_inner_products(mesh, ind, sfbm_model(5).truncated(M))
                                       : random_matrix<cdouble>(static_cast<Eigen::Index>(M),
                                                                static_cast<Eigen::Index>(mesh.size()), gen);
      outcomes.push_back(check_config<cdouble>(mesh, rows, n0));
    } else {
      // log-uniform N in [16, 4096]; the first configuration pins the upper end
      const double e = std::uniform_real_distribution<double>(4.0, 12.0)(gen);
      const auto N = c == 0 ? std::size_t{4096} : static_cast<std::size_t>(std::round(std::exp2(e)));
      const Mesh mesh = cell_mesh(uniform_interval_mesh(0.0, 1.0, N));
      const IndicatorBasis ind = make_indicator_basis(mesh, c % 4 == 1 ? Mode::Discrete : Mode::Continuous);
      Eigen::MatrixXd rows;
      if (model_rows) {
        const EigenModel model = c % 4 == 0 ? brownian_model(M) : gauss_model(M, 0.05, 1.0);
        rows = real_rows(eigen_inner_products(mesh, ind, model));
      } else {
        rows = random_matrix<double>(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N), gen);
      }
      outcomes.push_back(check_config<double>(mesh, rows, n0));
    }
  }
  const double elapsed = seconds_since(t0);
  double worst_gram = 0.0;
  double worst_leak = 0.0;
  bool dims = true;
  bool roots = true;
  std::size_t full = 0;
  std::size_t spheres = 0;
  std::size_t maxN = 0;
  for (const auto& o : outcomes) {
    worst_gram = std::max(worst_gram, o.gram);
    worst_leak = std::max(worst_leak, o.leak);
    dims = dims && o.dims_sum;
    roots = roots && o.root_is_M;
    full += o.full_rank ? 1 : 0;
    spheres += o.sphere ? 1 : 0;
    maxN = std::max(maxN, o.N);
  }
  verdict(1, worst_gram <= 1e-8 && worst_leak <= 1e-8 && elapsed <= 120.0,
          fmt("%zu configurations (%zu sphere, N up to %zu): max Gram deviation %.3g, max |<phi_i, psi>| %.3g, "
              "%.1fs",
              outcomes.size(), spheres, maxN, worst_gram, worst_leak, elapsed));
  verdict(2, dims && roots,
          fmt("a_00 + sum dim W_l = N in %s configurations; a_00 = M in all %zu full-rank configurations: %s",
              dims ? "all" : "NOT all", full, roots ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 3: transform oracle

template <typename Scalar>
void transform_oracle(std::size_t N, std::mt19937_64& gen, double& fwd, double& trip, double& parseval) {
  const Mesh mesh = cell_mesh(uniform_interval_mesh(0.0, 1.0, N));
  const Matrix<Scalar> rows = random_matrix<Scalar>(4, static_cast<Eigen::Index>(N), gen);
  const auto basis = build_basis<Scalar>(make_tree(mesh.points, 8), mesh, rows);
  for (int t = 0; t < 200; ++t) {
    const Vector<Scalar> x = random_matrix<Scalar>(static_cast<Eigen::Index>(N), 1, gen);
    const auto a = forward(basis, x);
    const auto b = dense_forward(basis, x);
    fwd = std::max({fwd, (a.root - b.root).cwiseAbs().maxCoeff(), (a.details - b.details).cwiseAbs().maxCoeff()});
    trip = std::max(trip, (inverse(basis, a) - x).cwiseAbs().maxCoeff());
    parseval = std::max(parseval, std::abs(a.energy() - x.squaredNorm()) / x.squaredNorm());
  }
}

void criterion_3() {
  std::mt19937_64 gen(3);
  double fwd = 0.0, trip = 0.0, parseval = 0.0;
  for (std::size_t N : {16, 64, 256}) {
    transform_oracle<double>(N, gen, fwd, trip, parseval);
    transform_oracle<cdouble>(N, gen, fwd, trip, parseval);
  }
  verdict(3, fwd <= 1e-10 && trip <= 1e-10 && parseval <= 1e-10,
          fmt("N in {16, 64, 256}, 200 vectors each, real and complex: forward vs dense %.3g, round trip %.3g, "
              "Parseval %.3g",
              fwd, trip, parseval));
}

// ---------------------------------------------------------------------------
// 4: S = ||w||^2 for w orthogonal to V0

void criterion_4() {
  std::mt19937_64 gen(4);
  double worst = 0.0;
  const Mesh mesh = cell_mesh(uniform_interval_mesh(0.0, 1.0, 300));
  const IndicatorBasis ind = make_indicator_basis(mesh, Mode::Continuous);
  const Eigen::MatrixXd rows = real_rows(eigen_inner_products(mesh, ind, gauss_model(6, 0.05, 1.0)));
  const auto basis = build_basis<double>(make_tree(mesh.points, 12), mesh, rows);
  const Eigen::MatrixXd E = Eigen::HouseholderQR<Eigen::MatrixXd>(rows.transpose()).householderQ() *
                            Eigen::MatrixXd::Identity(300, 6);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd w = random_matrix<double>(300, 1, gen);
    w -= E * (E.transpose() * w);
    const double S = global_energy(forward(basis, w));
    worst = std::max(worst, std::abs(S - w.squaredNorm()) / w.squaredNorm());
  }
  verdict(4, worst <= 1e-8, fmt("100 trials: max |S - ||w||^2| / ||w||^2 = %.3g", worst));
}

// ---------------------------------------------------------------------------
// 5 and 6: Monte Carlo moment bound and energy containment

void criteria_5_and_6() {
  const auto t0 = Clock::now();
  const std::size_t N = 512;
  const std::size_t trials = 2000;
  const EigenModel full = brownian_model(400);
  const Mesh mesh = cell_mesh(uniform_interval_mesh(0.0, 1.0, N));
  const IndicatorBasis ind = make_indicator_basis(mesh, Mode::Continuous);
  std::vector<double> lambda;
  for (const auto& p : full.pairs()) {
    lambda.push_back(p.eigenvalue);
  }
  const Eigen::MatrixXd full_rows = real_rows(eigen_inner_products(mesh, ind, full));

  bool bound_ok = true;
  bool contain_ok = true;
  std::vector<double> maxima;
  std::string moments_text;
  std::string contain_text;
  double contain_time = 0.0;
  for (std::size_t M : {5, 20, 80}) {
    const Eigen::MatrixXd rows = full_rows.topRows(static_cast<Eigen::Index>(M));
    const auto basis = build_basis<double>(make_tree(mesh.points, 16), mesh, rows);
    const double t_M = truncation_tail(lambda, M);
    const auto st = coefficient_moments(full, mesh, ind, basis, trials, 500 + M);
    const double limit = t_M + 3.0 * st.max_second_moment_se;
    bound_ok = bound_ok && st.max_second_moment <= limit;
    maxima.push_back(st.max_second_moment);
    moments_text += fmt(" M=%zu: max E|d|^2 %.4g <= %.4g;", M, st.max_second_moment, limit);

    const auto tc = Clock::now();
    // fixed bump with its V0 component removed by the basis itself, scaled to unit norm
    const Eigen::VectorXd bump = project_function<double>(mesh, ind, [](std::span<const double> x) {
      return std::exp(-std::pow((x[0] - 0.5) / 0.01, 2));
    });
    auto mc = forward(basis, bump);
    const double outside = mc.details.norm() / bump.norm();
    mc.root.setZero();
    Eigen::VectorXd w = inverse(basis, mc);
    w /= w.norm();
    const double w2 = w.squaredNorm();
    const auto sw = coefficient_moments(full, mesh, ind, basis, trials, 900 + M, &w);
    const double lo = w2 * (1.0 - 2.0 * t_M) + t_M - 3.0 * sw.energy_se;
    const double hi = w2 * (1.0 + 2.0 * t_M) + t_M + 3.0 * sw.energy_se;
    contain_ok = contain_ok && sw.energy_mean >= lo && sw.energy_mean <= hi;
    contain_text += fmt(" M=%zu (bump energy outside V0 %.3f): mean S %.6g in [%.6g, %.6g];", M, outside * outside,
                        sw.energy_mean, lo, hi);
    contain_time += seconds_since(tc);
  }
  const bool monotone = maxima[0] > maxima[1] && maxima[1] > maxima[2];
  const double elapsed = seconds_since(t0) - contain_time;
  verdict(5, bound_ok && monotone && elapsed <= 300.0,
          fmt("Brownian, M_full=400, 2000 trials:%s decreasing in M: %s; %.1fs", moments_text.c_str(),
              monotone ? "yes" : "no", elapsed));
  verdict(6, contain_ok, fmt("unit bump orthogonal to V0:%s %.1fs", contain_text.c_str(), contain_time));
}

// ---------------------------------------------------------------------------
// 7: interval examples

bool interval_demo(const std::string& id, std::string& text) {
  const DemoResult r = run_example(id);
  const auto& run = std::get<DemoRun<double>>(r.run);
  const int n = run.basis.levels();
  const double eps = 1e-9 * r.u_norm;
  const auto entries = localize(run.basis, run.coefficients, eps);
  bool inside = true;
  for (const auto& e : entries) {
    inside = inside && e.support_hi[0] >= 0.3 && e.support_lo[0] <= 0.7;
  }
  const auto all = localize(run.basis, run.coefficients, 0.0);
  bool tops = true;
  std::string top_text;
  for (int l = n - 1; l >= n - 3; --l) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const LocalizationEntry& e) { return e.level == l; });
    const bool has = it != all.end() && it->support_lo[0] <= 0.5 && it->support_hi[0] >= 0.5;
    tops = tops && has;
    if (it != all.end()) {
      top_text += fmt(" l=%d [%.4f, %.4f]", l, it->support_lo[0], it->support_hi[0]);
    } else {
      top_text += fmt(" l=%d none", l);
    }
  }
  text += fmt(" %s: n=%d, %zu coefficients above %.3g all meet [0.3, 0.7]: %s; top supports%s;", id.c_str(), n,
              entries.size(), eps, inside ? "yes" : "no", top_text.c_str());
  return inside && tops && !entries.empty();
}

void criterion_7() {
  std::string text;
  const bool a = interval_demo("interval-smooth", text);
  const bool b = interval_demo("interval-oscillatory", text);
  verdict(7, a && b, text.substr(1));
}

// ---------------------------------------------------------------------------
// 8: sphere example

void criterion_8() {
  const auto t0 = Clock::now();
  const DemoResult r = run_example("sphere");
  const double elapsed = seconds_since(t0);
  const Eigen::Vector3d center(0.0, 1.0, 0.0);
  std::map<int, double> worst;
  std::map<int, std::size_t> count;
  bool within = true;
  for (const auto& e : r.report.entries) {
    const Eigen::Vector3d c = e.centroid.head<3>();
    const double norm = c.norm();
    const double dist = norm > 1e-12 ? std::acos(std::clamp(c.dot(center) / norm, -1.0, 1.0)) : std::numbers::pi;
    worst[e.level] = std::max(worst[e.level], dist);
    ++count[e.level];
    within = within && dist <= 0.5;
  }
  const auto counts = sfbm_mode_counts(sfbm_spectrum(r.problem.config.model.l_max));
  const bool modes_match = counts.nonvanishing == 56;
  std::string levels;
  for (const auto& [l, d] : worst) {
    levels += fmt(" l=%d: %zu entries, max distance %.3f;", l, count[l], d);
  }
  verdict(8, within && modes_match && elapsed <= 180.0 && r.report.detected(),
          fmt("N=%zu, n=%d, eps=%.3g, %zu entries;%s all centroids within 0.5: %s; SFBM modes with nonzero d_l "
              "(l=0 included) %zu, retained %zu, reference 56: %s; %.1fs",
              r.problem.mesh.size(), r.report.levels, r.report.epsilon, r.report.entries.size(), levels.c_str(),
              within ? "yes" : "no", counts.nonvanishing, counts.retained, modes_match ? "match" : "mismatch",
              elapsed));
}

// ---------------------------------------------------------------------------
// 9: SFBM spectrum

void criterion_9() {
  const auto s = sfbm_spectrum(40);
  const double pi = std::numbers::pi;
  const double e1 = std::abs(s.d[1] + pi / 4.0);
  const double e3 = std::abs(s.d[3] + pi / 64.0);
  double vanish = 0.0;
  std::vector<double> ls, ds;
  for (int l = 1; l <= 40; ++l) {
    if (s.vanishing[static_cast<std::size_t>(l)]) {
      vanish = std::max(vanish, std::abs(s.d[static_cast<std::size_t>(l)]));
    } else {
      ls.push_back(l);
      ds.push_back(std::abs(s.d[static_cast<std::size_t>(l)]));
    }
  }
  const double slope = loglog_slope(ls, ds);
  verdict(9, e1 <= 1e-9 && e3 <= 1e-9 && vanish <= 1e-10 && std::abs(slope + 2.0) <= 0.3,
          fmt("|d1 + pi/4| = %.3g, |d3 + pi/64| = %.3g, max vanishing |d_l| = %.3g, fitted exponent over %zu "
              "nonzero l <= 40: %.3f (target -2 +/- 0.3)",
              e1, e3, vanish, ls.size(), slope));
}

// ---------------------------------------------------------------------------
// 10: complexity

double time_repeated(const std::function<void()>& fn, double budget) {
  std::size_t reps = 0;
  const auto t0 = Clock::now();
  do {
    fn();
    ++reps;
  } while (seconds_since(t0) < budget);
  return seconds_since(t0) / static_cast<double>(reps);
}

void criterion_10() {
  std::vector<double> Ns, build_t, fwd_t;
  std::string text;
  for (int p = 10; p <= 17; ++p) {
    const std::size_t N = std::size_t{1} << p;
    const Mesh mesh = cell_mesh(uniform_interval_mesh(0.0, 1.0, N));
    const IndicatorBasis ind = make_indicator_basis(mesh, Mode::Continuous);
    const Eigen::MatrixXd rows = real_rows(eigen_inner_products(mesh, ind, brownian_model(4)));
    MultilevelBasis<double> basis;
    const double tb = time_repeated([&] { basis = build_basis<double>(make_tree(mesh.points, 16), mesh, rows); }, 0.5);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(N), -1.0, 1.0);
    double sink = 0.0;
    const double tf = time_repeated([&] { sink += forward(basis, x).detail_energy(); }, 0.3);
    Ns.push_back(static_cast<double>(N));
    build_t.push_back(tb);
    fwd_t.push_back(tf);
    text += fmt(" 2^%d: %.3gs/%.3gs;", p, tb, tf + 0.0 * sink);
  }
  const double sb = loglog_slope(Ns, build_t);
  const double sf = loglog_slope(Ns, fwd_t);
  verdict(10, sb <= 1.15 && sf <= 1.15,
          fmt("M=4, n0=16, build/forward per N:%s log-log slope build %.3f, forward %.3f", text.c_str(), sb, sf));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> stages{
      {"1-2", criteria_1_and_2}, {"3", criterion_3},   {"4", criterion_4}, {"5-6", criteria_5_and_6},
      {"7", criterion_7},        {"8", criterion_8},   {"9", criterion_9}, {"10", criterion_10}};
  for (const auto& [name, fn] : stages) {
    try {
      fn();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %s: exception: %s\n", name, e.what());
      ++failures;
    }
  }
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
