#include "mlcd/pipeline.hpp"

#include <cmath>
#include <set>

#include "mlcd/io.hpp"

namespace mlcd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) {
    throw std::invalid_argument("config: '" + where + "' must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    out = obj.at(key).get<T>();
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    out = obj.at(key).get<T>();
  }
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) {
    return p;
  }
  return (base / p).string();
}

CoefficientLaw parse_law(const std::string& s) {
  if (s == "normal") {
    return CoefficientLaw::StandardNormal;
  }
  if (s == "uniform") {
    return CoefficientLaw::UniformSqrt3;
  }
  if (s == "zero") {
    return CoefficientLaw::Zero;
  }
  throw std::invalid_argument("config: law must be normal, uniform or zero");
}

}  // namespace

std::size_t n0_for_levels(std::size_t cells, int levels) {
  if (levels < 1) {
    throw std::invalid_argument("levels must be >= 1");
  }
  const double denom = std::ldexp(1.0, levels - 1);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(static_cast<double>(cells) / denom)));
}

RunConfig parse_config(const json& j, const fs::path& base) {
  RunConfig c;
  try {
    reject_unknown(j, {"model", "mesh", "tree", "basis", "detect", "bump", "seed", "out", "signal"}, "config");
    if (j.contains("model")) {
      const auto& m = j.at("model");
      reject_unknown(m, {"type", "modes", "tail_tol", "max_modes", "law", "Lc", "tau", "Lp", "L", "l_max", "samples"},
                     "model");
      read(m, "type", c.model.type);
      read_opt(m, "modes", c.model.modes);
      read_opt(m, "tail_tol", c.model.tail_tol);
      read_opt(m, "max_modes", c.model.max_modes);
      read_opt(m, "law", c.model.law);
      read(m, "Lc", c.model.Lc);
      read(m, "tau", c.model.tau);
      read_opt(m, "Lp", c.model.Lp);
      read_opt(m, "L", c.model.L);
      read(m, "l_max", c.model.l_max);
      read(m, "samples", c.model.samples);
      c.model.samples = resolve(c.model.samples, base);
    }
    if (j.contains("mesh")) {
      const auto& m = j.at("mesh");
      reject_unknown(m, {"type", "a", "b", "cells", "subdivisions", "vertices", "simplices"}, "mesh");
      read(m, "type", c.mesh.type);
      read(m, "a", c.mesh.a);
      read(m, "b", c.mesh.b);
      read(m, "cells", c.mesh.cells);
      read(m, "subdivisions", c.mesh.subdivisions);
      read(m, "vertices", c.mesh.vertices);
      read(m, "simplices", c.mesh.simplices);
      c.mesh.vertices = resolve(c.mesh.vertices, base);
      c.mesh.simplices = resolve(c.mesh.simplices, base);
    }
    if (j.contains("tree")) {
      const auto& t = j.at("tree");
      reject_unknown(t, {"n0", "levels"}, "tree");
      read_opt(t, "n0", c.n0);
      read_opt(t, "levels", c.levels);
    }
    if (j.contains("basis")) {
      const auto& b = j.at("basis");
      reject_unknown(b, {"rank_tol", "mode", "archive"}, "basis");
      read(b, "rank_tol", c.rank_tol);
      if (b.contains("mode")) {
        c.mode = parse_mode(b.at("mode").get<std::string>());
      }
      read(b, "archive", c.basis);
      c.basis = resolve(c.basis, base);
    }
    if (j.contains("detect")) {
      const auto& d = j.at("detect");
      reject_unknown(d, {"epsilon", "epsilon_relative", "region", "t_M"}, "detect");
      read_opt(d, "epsilon", c.epsilon);
      read(d, "epsilon_relative", c.epsilon_relative);
      read_opt(d, "region", c.region);
      read_opt(d, "t_M", c.t_M);
    }
    if (j.contains("bump") && !j.at("bump").is_null()) {
      const auto& b = j.at("bump");
      reject_unknown(b, {"amplitude", "center", "sigma", "support"}, "bump");
      BumpSpec bump;
      read(b, "amplitude", bump.amplitude);
      read(b, "center", bump.center);
      read(b, "sigma", bump.sigma);
      read_opt(b, "support", bump.support);
      c.bump = bump;
    }
    read(j, "seed", c.seed);
    read(j, "out", c.out);
    read(j, "signal", c.signal);
    c.signal = resolve(c.signal, base);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  return parse_config(io::read_json(path), path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json model = {{"type", c.model.type}, {"Lc", c.model.Lc}, {"tau", c.model.tau}, {"l_max", c.model.l_max}};
  if (c.model.modes) model["modes"] = *c.model.modes;
  if (c.model.tail_tol) model["tail_tol"] = *c.model.tail_tol;
  if (c.model.max_modes) model["max_modes"] = *c.model.max_modes;
  if (c.model.law) model["law"] = *c.model.law;
  if (c.model.Lp) model["Lp"] = *c.model.Lp;
  if (c.model.L) model["L"] = *c.model.L;
  if (!c.model.samples.empty()) model["samples"] = c.model.samples;
  json mesh = {{"type", c.mesh.type}};
  if (c.mesh.type == "interval") {
    mesh["a"] = c.mesh.a;
    mesh["b"] = c.mesh.b;
    mesh["cells"] = c.mesh.cells;
  } else if (c.mesh.type == "icosphere") {
    mesh["subdivisions"] = c.mesh.subdivisions;
  } else {
    mesh["vertices"] = c.mesh.vertices;
    mesh["simplices"] = c.mesh.simplices;
  }
  json tree = json::object();
  if (c.n0) tree["n0"] = *c.n0;
  if (c.levels) tree["levels"] = *c.levels;
  json basis = {{"rank_tol", c.rank_tol}, {"mode", to_string(c.mode)}};
  if (!c.basis.empty()) basis["archive"] = c.basis;
  json detect = {{"epsilon_relative", c.epsilon_relative}};
  if (c.epsilon) detect["epsilon"] = *c.epsilon;
  if (c.region) detect["region"] = *c.region;
  if (c.t_M) detect["t_M"] = *c.t_M;
  json out = {{"model", model}, {"mesh", mesh}, {"tree", tree}, {"basis", basis},
              {"detect", detect}, {"seed", c.seed}, {"out", c.out}};
  if (!c.signal.empty()) out["signal"] = c.signal;
  if (c.bump) {
    out["bump"] = {{"amplitude", c.bump->amplitude}, {"center", c.bump->center}, {"sigma", c.bump->sigma}};
    if (c.bump->support) out["bump"]["support"] = *c.bump->support;
  }
  return out;
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  const std::set<std::string> models{"brownian", "gauss", "sfbm", "snapshot"};
  if (!models.count(c.model.type)) fail("model.type must be brownian, gauss, sfbm or snapshot");
  if (c.model.modes && *c.model.modes < 1) fail("model.modes must be >= 1");
  if (c.model.tail_tol && !(*c.model.tail_tol > 0.0)) fail("model.tail_tol must be positive");
  if (c.model.max_modes && *c.model.max_modes < 1) fail("model.max_modes must be >= 1");
  if (c.model.law) parse_law(*c.model.law);
  if (!(c.model.Lc > 0.0) || !(c.model.tau > 0.0)) fail("model.Lc and model.tau must be positive");
  if ((c.model.Lp && !(*c.model.Lp > 0.0)) || (c.model.L && !(*c.model.L > 0.0))) fail("model.Lp and model.L must be positive");
  if (c.model.l_max < 1 || c.model.l_max > 200) fail("model.l_max must be in 1..200");
  if (c.model.type == "snapshot") {
    if (!fs::exists(c.model.samples)) fail("snapshot samples file '" + c.model.samples + "' does not exist");
    if (c.mode != Mode::Discrete) fail("snapshot models require discrete mode");
  }
  if (c.mesh.type == "interval") {
    if (c.mesh.cells < 1) fail("mesh.cells must be >= 1");
    if (!(c.mesh.a < c.mesh.b)) fail("mesh.a must be below mesh.b");
  } else if (c.mesh.type == "icosphere") {
    if (c.mesh.subdivisions < 0 || c.mesh.subdivisions > 8) fail("mesh.subdivisions must be in 0..8");
  } else if (c.mesh.type == "files") {
    if (!fs::exists(c.mesh.vertices)) fail("vertices file '" + c.mesh.vertices + "' does not exist");
    if (!fs::exists(c.mesh.simplices)) fail("simplices file '" + c.mesh.simplices + "' does not exist");
  } else {
    fail("mesh.type must be interval, icosphere or files");
  }
  if (c.n0 && *c.n0 < 1) fail("tree.n0 must be >= 1");
  if (c.levels && *c.levels < 1) fail("tree.levels must be >= 1");
  if (!(c.rank_tol > 0.0 && c.rank_tol < 1.0)) fail("basis.rank_tol must lie in (0, 1)");
  if (c.epsilon && !(*c.epsilon >= 0.0)) fail("detect.epsilon must be non-negative");
  if (!(c.epsilon_relative >= 0.0)) fail("detect.epsilon_relative must be non-negative");
  if (c.t_M && !(*c.t_M >= 0.0)) fail("detect.t_M must be non-negative");
  if (c.region) parse_region(*c.region);
  if (c.bump) {
    if (!(c.bump->sigma > 0.0)) fail("bump.sigma must be positive");
    if (c.bump->support) parse_region(*c.bump->support);
  }
}

Problem assemble(const RunConfig& config) {
  validate_config(config);
  Problem p;
  p.config = config;
  const auto& ms = config.mesh;
  if (ms.type == "interval") {
    p.complex = uniform_interval_mesh(ms.a, ms.b, ms.cells);
    p.mesh = cell_mesh(*p.complex);
  } else if (ms.type == "icosphere") {
    p.complex = icosphere(ms.subdivisions);
    p.mesh = sphere_vertex_mesh(*p.complex);
  } else {
    p.complex = io::read_mesh_csv(ms.vertices, ms.simplices);
    if (p.complex->size() <= 10000) {
      p.complex->validate_intersections();
    }
    p.mesh = cell_mesh(*p.complex);
  }
  p.indicators = make_indicator_basis(p.mesh, config.mode);
  const std::size_t N = p.mesh.size();
  p.n0 = config.n0 ? *config.n0 : (config.levels ? n0_for_levels(N, *config.levels) : 16);

  const auto& m = config.model;
  const std::size_t cap = m.max_modes ? *m.max_modes : std::max<std::size_t>(1, p.n0 - 1);
  auto pick = [&](const EigenModel& probe) -> std::size_t {
    if (m.modes) {
      return *m.modes;
    }
    return choose_truncation(probe, m.tail_tol.value_or(kDefaultTailTol), cap);
  };
  if (m.type == "brownian" || m.type == "gauss") {
    auto factory = [&](std::size_t M) {
      if (m.type == "brownian") {
        return brownian_model(M);
      }
      GaussParams gp = gauss_params(m.Lc, m.tau);
      if (m.Lp) gp.Lp = *m.Lp;
      if (m.L) gp.L = *m.L;
      return gauss_model(M, gp);
    };
    p.modes = pick(factory(1));
    p.model = factory(p.modes);
    p.t_M = truncation_tail(*p.model, p.modes).value;
  } else if (m.type == "sfbm") {
    const EigenModel full = sfbm_model(m.l_max);
    p.modes = m.modes ? std::min(*m.modes, full.size()) : (m.tail_tol ? choose_truncation(full, *m.tail_tol, full.size()) : full.size());
    p.model = full.truncated(p.modes);
    p.t_M = truncation_tail(*p.model, p.modes).value;
  } else {
    const Eigen::MatrixXd samples = io::read_snapshot_csv(m.samples);
    if (static_cast<std::size_t>(samples.rows()) != N) {
      throw ModelError("snapshot samples have " + std::to_string(samples.rows()) + " columns, mesh has " +
                       std::to_string(N) + " cells");
    }
    const std::size_t S = static_cast<std::size_t>(samples.cols());
    p.modes = m.modes ? *m.modes : std::min({cap, S, N});
    p.snapshot = snapshot_eigenpairs(samples, p.modes);
    p.snapshot_mean = samples.rowwise().mean();
    const double trace = (samples.colwise() - p.snapshot_mean).squaredNorm() / static_cast<double>(S);
    p.t_M = std::max(0.0, trace - p.snapshot->eigenvalues.sum());
  }
  if (p.model && m.law) {
    p.model->set_law(parse_law(*m.law));
  }
  if (config.t_M) {
    p.t_M = *config.t_M;
  }
  p.field = p.model ? p.model->field() : Field::Real;
  return p;
}

std::vector<double> Problem::eigenvalues() const {
  std::vector<double> ev;
  if (model) {
    for (const auto& pair : model->pairs()) {
      ev.push_back(pair.eigenvalue);
    }
  } else {
    ev.assign(snapshot->eigenvalues.data(), snapshot->eigenvalues.data() + snapshot->eigenvalues.size());
  }
  return ev;
}

Matrix<cdouble> Problem::rows() const {
  if (model) {
    return eigen_inner_products(mesh, indicators, *model);
  }
  return snapshot->vectors.transpose().cast<cdouble>();
}

KdTree Problem::tree() const { return make_tree(mesh.points, n0); }

template <typename Scalar>
MultilevelBasis<Scalar> Problem::build(const KdTree& tree) const {
  if constexpr (std::is_same_v<Scalar, double>) {
    return build_basis<double>(tree, mesh, real_rows(rows()), config.rank_tol);
  } else {
    return build_basis<cdouble>(tree, mesh, rows(), config.rank_tol);
  }
}

Vector<cdouble> Problem::simulate(std::uint64_t seed) const {
  if (model) {
    return evaluate_realization(*model, mesh.points, draw_coefficients(*model, seed));
  }
  std::vector<EigenPair> slots(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    slots[k].index = static_cast<int>(k) + 1;
  }
  EigenModel law_probe("snapshot", Interval{}, std::move(slots), Field::Real,
                       config.model.law ? parse_law(*config.model.law) : CoefficientLaw::StandardNormal);
  const Eigen::VectorXd y = draw_coefficients(law_probe, seed);
  const Eigen::VectorXd v = snapshot_mean + snapshot->vectors * y.cwiseProduct(snapshot->eigenvalues.cwiseSqrt());
  return v.cast<cdouble>();
}

Vector<cdouble> Problem::bump_values() const {
  Vector<cdouble> w = Vector<cdouble>::Zero(static_cast<Eigen::Index>(mesh.size()));
  if (!config.bump) {
    return w;
  }
  const auto& b = *config.bump;
  std::optional<Region> support;
  if (b.support) {
    support = parse_region(*b.support);
  }
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto x = mesh.point(i);
    if (support && !region_contains(*support, x)) {
      continue;
    }
    double r2 = 0.0;
    if (mesh.sphere) {
      if (b.center.size() != 2) {
        throw std::invalid_argument("bump: a spherical center is (theta, phi)");
      }
      const auto [theta, phi] = sphere_angles(x);
      r2 = (theta - b.center[0]) * (theta - b.center[0]) + (phi - b.center[1]) * (phi - b.center[1]);
    } else {
      if (b.center.size() != x.size()) {
        throw std::invalid_argument("bump: center dimension does not match the mesh");
      }
      for (std::size_t a = 0; a < x.size(); ++a) {
        r2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
      }
    }
    w[static_cast<Eigen::Index>(i)] = b.amplitude * std::exp(-r2 / (b.sigma * b.sigma));
  }
  return w;
}

Vector<cdouble> Problem::project(const Vector<cdouble>& values) const {
  return project_signal<cdouble>(indicators, values);
}

std::optional<SupportQuery> Problem::region() const {
  if (!config.region) {
    return std::nullopt;
  }
  return resolve_region(parse_region(*config.region), mesh.points);
}

template MultilevelBasis<double> Problem::build<double>(const KdTree&) const;
template MultilevelBasis<cdouble> Problem::build<cdouble>(const KdTree&) const;

}  // namespace mlcd
