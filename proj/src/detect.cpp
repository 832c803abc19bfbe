#include "mlcd/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mlcd {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size()) {
      throw std::invalid_argument("region: malformed number '" + item + "'");
    }
  }
  return out;
}

Eigen::Vector3d unit_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

}  // namespace

Region parse_region(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("region '" + text + "': expected kind:values");
  }
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  if (kind == "interval") {
    const auto v = parse_numbers(body);
    if (v.size() != 2 || !(v[0] <= v[1])) {
      throw std::invalid_argument("region: interval needs lo,hi with lo <= hi");
    }
    return IntervalRegion{v[0], v[1]};
  }
  if (kind == "box") {
    const auto semi = body.find(';');
    if (semi == std::string::npos) {
      throw std::invalid_argument("region: box needs lo..;hi..");
    }
    const auto lo = parse_numbers(body.substr(0, semi));
    const auto hi = parse_numbers(body.substr(semi + 1));
    if (lo.empty() || lo.size() != hi.size()) {
      throw std::invalid_argument("region: box corners must have equal dimension");
    }
    BoxRegion box;
    box.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    box.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    return box;
  }
  if (kind == "cap") {
    const auto v = parse_numbers(body);
    if (v.size() != 3 || v[2] < 0.0) {
      throw std::invalid_argument("region: cap needs theta,phi,angle");
    }
    return CapRegion{unit_from_angles(v[0], v[1]), v[2]};
  }
  throw std::invalid_argument("region: unknown kind '" + kind + "'");
}

std::string format_region(const Region& region) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* iv = std::get_if<IntervalRegion>(&region)) {
    os << "interval:" << iv->lo << "," << iv->hi;
  } else if (const auto* box = std::get_if<BoxRegion>(&region)) {
    os << "box:";
    for (Eigen::Index i = 0; i < box->lo.size(); ++i) {
      os << (i ? "," : "") << box->lo[i];
    }
    os << ";";
    for (Eigen::Index i = 0; i < box->hi.size(); ++i) {
      os << (i ? "," : "") << box->hi[i];
    }
  } else {
    const auto& cap = std::get<CapRegion>(region);
    const double theta = std::acos(std::clamp(cap.center.z(), -1.0, 1.0));
    const double phi = std::atan2(cap.center.y(), cap.center.x());
    os << "cap:" << theta << "," << phi << "," << cap.angle;
  }
  return os.str();
}

bool region_contains(const Region& region, std::span<const double> p) {
  if (const auto* iv = std::get_if<IntervalRegion>(&region)) {
    return !p.empty() && p[0] >= iv->lo && p[0] <= iv->hi;
  }
  if (const auto* box = std::get_if<BoxRegion>(&region)) {
    if (static_cast<Eigen::Index>(p.size()) != box->lo.size()) {
      throw std::invalid_argument("region: box dimension does not match the mesh");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (p[i] < box->lo[k] || p[i] > box->hi[k]) {
        return false;
      }
    }
    return true;
  }
  const auto& cap = std::get<CapRegion>(region);
  if (p.size() != 3) {
    throw std::invalid_argument("region: spherical cap needs points in R^3");
  }
  const Eigen::Vector3d x(p[0], p[1], p[2]);
  const double c = std::clamp(x.normalized().dot(cap.center), -1.0, 1.0);
  return std::acos(c) <= cap.angle;
}

SupportQuery resolve_region(const Region& region, const Eigen::MatrixXd& cell_points) {
  SupportQuery q{region, {}};
  for (Eigen::Index i = 0; i < cell_points.cols(); ++i) {
    std::span<const double> p(cell_points.col(i).data(), static_cast<std::size_t>(cell_points.rows()));
    if (region_contains(region, p)) {
      q.cells.push_back(static_cast<std::size_t>(i));
    }
  }
  return q;
}

EnergyInterval energy_interval(double S, double t_M) {
  if (S < 0.0 || t_M < 0.0 || !std::isfinite(S) || !std::isfinite(t_M)) {
    throw std::invalid_argument("energy_interval: S and t_M must be finite and non-negative");
  }
  EnergyInterval out;
  out.lo = std::max(0.0, (S - t_M) / (1.0 + 2.0 * t_M));
  if (t_M >= 0.5) {
    out.unbounded = true;
    out.hi = std::numeric_limits<double>::infinity();
  } else {
    out.hi = std::max(out.lo, (S - t_M) / (1.0 - 2.0 * t_M));
  }
  return out;
}

template <typename Scalar>
std::vector<LocalizationEntry> localize(const MultilevelBasis<Scalar>& basis,
                                        const MultilevelCoefficients<Scalar>& mc, double epsilon,
                                        const SupportQuery* region) {
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("localize: epsilon must be non-negative");
  }
  if (static_cast<std::size_t>(mc.details.size()) != basis.detail_count()) {
    throw std::invalid_argument("localize: coefficients do not match the basis");
  }
  std::vector<char> in_region;
  if (region != nullptr) {
    in_region.assign(basis.size(), 0);
    for (std::size_t c : region->cells) {
      in_region.at(c) = 1;
    }
  }
  std::vector<LocalizationEntry> entries;
  for (std::size_t k = 0; k < basis.detail_count(); ++k) {
    const double a = std::abs(mc.details[static_cast<Eigen::Index>(k)]);
    if (!(a > epsilon)) {
      continue;
    }
    const std::size_t id = basis.detail_id(k);
    const auto support = basis.support_of(id);
    if (region != nullptr &&
        std::none_of(support.cells.begin(), support.cells.end(), [&](std::size_t c) { return in_region[c]; })) {
      continue;
    }
    const auto& key = basis.details()[k];
    LocalizationEntry e;
    e.level = key.level;
    e.id = id;
    e.node = key.node;
    e.local = key.local;
    e.value = cdouble(mc.details[static_cast<Eigen::Index>(k)]);
    e.abs_d = a;
    e.support_cells = support.cells.size();
    e.support_lo = support.lo;
    e.support_hi = support.hi;
    e.centroid = basis.support_centroid(id);
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    if (x.level != y.level) {
      return x.level < y.level;
    }
    return x.abs_d > y.abs_d;
  });
  return entries;
}

template <typename Scalar>
DetectionReport detect(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc,
                       double t_M, double epsilon, Mode mode, const SupportQuery* region) {
  DetectionReport r;
  r.S = global_energy(mc);
  r.t_M = t_M;
  r.interval = energy_interval(r.S, t_M);
  r.epsilon = epsilon;
  r.mode = to_string(mode);
  r.field = to_string(basis.field());
  r.cells = basis.size();
  r.modes = basis.num_modes();
  r.levels = basis.levels();
  if (region != nullptr) {
    r.region = format_region(region->region);
  }
  r.entries = localize(basis, mc, epsilon, region);
  return r;
}

template <typename Scalar>
MomentStats coefficient_moments(const EigenModel& full, const Mesh& mesh, const IndicatorBasis& indicators,
                                const MultilevelBasis<Scalar>& basis, std::size_t trials, std::uint64_t seed,
                                const Vector<Scalar>* offset) {
  if (trials < 100) {
    throw std::invalid_argument("coefficient_moments: at least 100 trials are required");
  }
  if (mesh.size() != basis.size()) {
    throw std::invalid_argument("coefficient_moments: mesh does not match the basis");
  }
  if (offset != nullptr && static_cast<std::size_t>(offset->size()) != basis.size()) {
    throw std::invalid_argument("coefficient_moments: offset has the wrong length");
  }
  Matrix<Scalar> rows;
  if constexpr (std::is_same_v<Scalar, double>) {
    rows = real_rows(eigen_inner_products(mesh, indicators, full));
  } else {
    rows = eigen_inner_products(mesh, indicators, full);
  }
  Eigen::VectorXd sqrt_lambda(static_cast<Eigen::Index>(full.size()));
  for (std::size_t k = 0; k < full.size(); ++k) {
    sqrt_lambda[static_cast<Eigen::Index>(k)] = std::sqrt(full.pairs()[k].eigenvalue);
  }
  const auto D = static_cast<Eigen::Index>(basis.detail_count());
  Vector<Scalar> sum = Vector<Scalar>::Zero(D);
  Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd sum4 = Eigen::VectorXd::Zero(D);
  double s_sum = 0.0;
  double s_sum2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::VectorXd y = draw_coefficients(full, mode_seed(seed, t)).cwiseProduct(sqrt_lambda);
    // fine coefficients c_j = sum_i sqrt(lambda_i) Y_i conj(rows_ij)
    Vector<Scalar> c = rows.adjoint() * y.cast<Scalar>();
    if (offset != nullptr) {
      c += *offset;
    }
    const auto mc = forward(basis, c);
    sum += mc.details;
    const Eigen::VectorXd a2 = mc.details.cwiseAbs2();
    sum2 += a2;
    sum4 += a2.cwiseAbs2();
    const double S = a2.sum();
    s_sum += S;
    s_sum2 += S * S;
  }
  const double n = static_cast<double>(trials);
  MomentStats st;
  st.trials = trials;
  st.abs_mean = (sum / n).cwiseAbs();
  st.second_moment = sum2 / n;
  const Eigen::VectorXd fourth = sum4 / n;
  st.second_moment_se =
      ((fourth - st.second_moment.cwiseAbs2()).cwiseMax(0.0) / n).cwiseSqrt();
  if (D > 0) {
    st.max_abs_mean = st.abs_mean.maxCoeff();
    Eigen::Index arg = 0;
    st.max_second_moment = st.second_moment.maxCoeff(&arg);
    st.argmax = static_cast<std::size_t>(arg);
    st.max_second_moment_se = st.second_moment_se[arg];
    st.max_std = (st.second_moment - st.abs_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt().maxCoeff();
  }
  st.energy_mean = s_sum / n;
  st.energy_se = std::sqrt(std::max(s_sum2 / n - st.energy_mean * st.energy_mean, 0.0) / n);
  return st;
}

template std::vector<LocalizationEntry> localize(const MultilevelBasis<double>&,
                                                 const MultilevelCoefficients<double>&, double,
                                                 const SupportQuery*);
template std::vector<LocalizationEntry> localize(const MultilevelBasis<cdouble>&,
                                                 const MultilevelCoefficients<cdouble>&, double,
                                                 const SupportQuery*);
template DetectionReport detect(const MultilevelBasis<double>&, const MultilevelCoefficients<double>&, double,
                                double, Mode, const SupportQuery*);
template DetectionReport detect(const MultilevelBasis<cdouble>&, const MultilevelCoefficients<cdouble>&, double,
                                double, Mode, const SupportQuery*);
template MomentStats coefficient_moments(const EigenModel&, const Mesh&, const IndicatorBasis&,
                                         const MultilevelBasis<double>&, std::size_t, std::uint64_t,
                                         const Vector<double>*);
template MomentStats coefficient_moments(const EigenModel&, const Mesh&, const IndicatorBasis&,
                                         const MultilevelBasis<cdouble>&, std::size_t, std::uint64_t,
                                         const Vector<cdouble>*);

}  // namespace mlcd
