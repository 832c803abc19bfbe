#include "mlcd/demo.hpp"

#include <cmath>
#include <numbers>

#include "mlcd/io.hpp"

namespace mlcd {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& example_ids() {
  static const std::vector<std::string> ids{"interval-smooth", "interval-oscillatory", "sphere"};
  return ids;
}

RunConfig example_config(const std::string& id) {
  RunConfig c;
  c.mode = Mode::Discrete;
  c.seed = 1;
  if (id == "interval-smooth" || id == "interval-oscillatory") {
    c.mesh.type = "interval";
    c.mesh.cells = 500;
    c.model.type = "gauss";
    c.model.Lc = 0.01;
    c.model.tau = 1.0;
    c.levels = 6;
    c.epsilon_relative = 1e-6;
    BumpSpec bump;
    bump.amplitude = 0.05;
    bump.center = {0.5};
    bump.sigma = std::pow(10.0, -1.5);
    bump.support = "interval:0.3,0.7";
    if (id == "interval-oscillatory") {
      c.model.Lp = 0.25;
      c.model.L = 0.25;
      bump.amplitude = 0.5;
    }
    c.bump = bump;
  } else if (id == "sphere") {
    c.mesh.type = "icosphere";
    c.mesh.subdivisions = 5;
    c.model.type = "sfbm";
    c.model.l_max = 10;
    c.levels = 8;
    c.epsilon = 1e-4;
    BumpSpec bump;
    bump.amplitude = 0.5;
    bump.center = {std::numbers::pi / 2.0, std::numbers::pi / 2.0};
    bump.sigma = 0.1;
    c.bump = bump;
  } else {
    throw std::invalid_argument("unknown example '" + id + "' (expected interval-smooth, interval-oscillatory or sphere)");
  }
  c.out = "demo-" + id;
  return c;
}

namespace {

template <typename Scalar>
DemoRun<Scalar> transform_run(const Problem& p, const KdTree& tree, const Vector<cdouble>& fine) {
  DemoRun<Scalar> run{p.build<Scalar>(tree), {}};
  if constexpr (std::is_same_v<Scalar, double>) {
    run.coefficients = forward(run.basis, Eigen::VectorXd(fine.real()));
  } else {
    run.coefficients = forward(run.basis, fine);
  }
  return run;
}

}  // namespace

DemoResult run_problem(const std::string& id, Problem problem, const Vector<cdouble>& v, const Vector<cdouble>& w) {
  DemoResult r;
  r.id = id;
  r.problem = std::move(problem);
  const Problem& p = r.problem;
  r.tree = p.tree();
  r.v = v;
  r.w = w;
  r.u = v + w;
  const Vector<cdouble> fine = p.project(r.u);
  r.u_norm = fine.norm();
  const double eps = p.config.epsilon ? *p.config.epsilon
                     : p.config.epsilon_relative > 0.0 ? p.config.epsilon_relative * r.u_norm
                                                        : kDefaultEpsilon;
  const auto region = p.region();
  const SupportQuery* rq = region ? &*region : nullptr;
  if (p.field == Field::Real) {
    auto run = transform_run<double>(p, r.tree, fine);
    r.report = detect(run.basis, run.coefficients, p.t_M, eps, p.config.mode, rq);
    r.run = std::move(run);
  } else {
    auto run = transform_run<cdouble>(p, r.tree, fine);
    r.report = detect(run.basis, run.coefficients, p.t_M, eps, p.config.mode, rq);
    r.run = std::move(run);
  }
  return r;
}

DemoResult run_example(const std::string& id, const json& overrides, std::optional<std::uint64_t> seed,
                       const std::optional<fs::path>& out) {
  json cfg = config_to_json(example_config(id));
  if (!overrides.is_null() && !overrides.empty()) {
    cfg.merge_patch(overrides);
  }
  RunConfig config = parse_config(cfg);
  if (seed) {
    config.seed = *seed;
  }
  Problem p = assemble(config);
  const Vector<cdouble> v = p.simulate(config.seed);
  const Vector<cdouble> w = p.bump_values();
  DemoResult r = run_problem(id, std::move(p), v, w);
  if (out) {
    r.files = write_demo_outputs(r, *out);
  }
  return r;
}

std::vector<fs::path> write_demo_outputs(const DemoResult& r, const fs::path& out) {
  fs::create_directories(out);
  const bool complex = r.problem.field == Field::Complex;
  std::vector<fs::path> files{out / "config.json", out / "signal.csv", out / "signal_v.csv",
                              out / "signal_w.csv", out / "eigenvalues.csv", out / "tree.json",
                              out / "report.json"};
  io::write_json(files[0], config_to_json(r.problem.config));
  io::write_signal_csv(files[1], r.u, complex);
  io::write_signal_csv(files[2], r.v, complex);
  io::write_signal_csv(files[3], r.w, complex);
  io::write_eigenvalues_csv(files[4], r.problem.eigenvalues());
  io::write_json(files[5], io::tree_to_json(r.tree));
  io::write_report(files[6], r.report);
  if (r.problem.config.model.type == "sfbm") {
    files.push_back(out / "spectrum.csv");
    io::write_spectrum_csv(files.back(), sfbm_spectrum(r.problem.config.model.l_max));
  }
  std::visit(
      [&](const auto& run) {
        io::save_basis(run.basis, out / "basis");
        files.push_back(out / "basis.json");
        files.push_back(out / "basis.bin");
        io::write_coefficients_csv(out / "coefficients.csv", run.basis, run.coefficients);
        files.push_back(out / "coefficients.csv");
        for (auto& f : io::write_level_csvs(out, run.basis, run.coefficients)) {
          files.push_back(f);
        }
      },
      r.run);
  return files;
}

}  // namespace mlcd
