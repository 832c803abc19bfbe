#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mlcd/demo.hpp"
#include "mlcd/io.hpp"
#include "mlcd/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mlcd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDetected = 2;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<std::size_t> n0;
  std::optional<double> rank_tol;
  std::optional<double> epsilon;
  std::optional<std::string> region;
};

void add_common(CLI::App* cmd, Overrides& o, bool detection_flags) {
  cmd->add_option("--config", o.config, "run configuration (JSON)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--mode", o.mode, "continuous | discrete")->check(CLI::IsMember({"continuous", "discrete"}));
  cmd->add_option("--n0", o.n0, "leaf size")->check(CLI::PositiveNumber);
  cmd->add_option("--rank-tol", o.rank_tol, "relative singular value cutoff");
  if (detection_flags) {
    cmd->add_option("--epsilon", o.epsilon, "localization threshold");
    cmd->add_option("--region", o.region, "interval:lo,hi | box:lo..;hi.. | cap:theta,phi,angle");
  }
}

void apply(const Overrides& o, RunConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.n0) c.n0 = *o.n0;
  if (o.rank_tol) c.rank_tol = *o.rank_tol;
  if (o.epsilon) c.epsilon = *o.epsilon;
  if (o.region) c.region = *o.region;
}

RunConfig config_from(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  apply(o, c);
  validate_config(c);
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_accounting(const auto& basis) {
  std::printf("cells N = %zu, modes M = %zu, levels n = %d, leaf size n0 = %zu\n", basis.size(),
              basis.num_modes(), basis.levels(), basis.tree().leaf_size());
  std::printf("a_00 (root scaling) = %zu\n", basis.root_dim());
  std::size_t total = basis.root_dim();
  for (int l = 0; l < basis.levels(); ++l) {
    std::printf("dim W_%d = %zu\n", l, basis.level_dim(l));
    total += basis.level_dim(l);
  }
  std::printf("a_00 + sum dim W_l = %zu\n", total);
  for (const auto& w : basis.warnings()) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
}

void print_report(const DetectionReport& r) {
  std::printf("S = %.17g, t_M = %.17g\n", r.S, r.t_M);
  if (r.interval.unbounded) {
    std::printf("||w||^2 in [%.17g, inf) (t_M >= 1/2, upper bound unavailable)\n", r.interval.lo);
  } else {
    std::printf("||w||^2 in [%.17g, %.17g]\n", r.interval.lo, r.interval.hi);
  }
  std::printf("epsilon = %.6g, entries above threshold = %zu\n", r.epsilon, r.entries.size());
}

int cmd_simulate(const Overrides& o) {
  RunConfig c = config_from(o);
  const Problem p = assemble(c);
  const Vector<cdouble> v = p.simulate(c.seed);
  const Vector<cdouble> w = p.bump_values();
  const bool complex = p.field == Field::Complex;
  const fs::path out(c.out);
  io::write_signal_csv(out / "signal.csv", v + w, complex);
  io::write_signal_csv(out / "signal_v.csv", v, complex);
  if (c.bump) {
    io::write_signal_csv(out / "signal_w.csv", w, complex);
  }
  io::write_eigenvalues_csv(out / "eigenvalues.csv", p.eigenvalues());
  std::printf("wrote %zu samples (M = %zu, t_M = %.6g) to %s\n", p.mesh.size(), p.modes, p.t_M,
              (out / "signal.csv").string().c_str());
  return kExitOk;
}

int cmd_build(const Overrides& o) {
  RunConfig c = config_from(o);
  const auto t0 = std::chrono::steady_clock::now();
  const Problem p = assemble(c);
  const double t_setup = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  const KdTree tree = p.tree();
  const double t_tree = seconds_since(t1);
  const fs::path out(c.out);
  auto finish = [&](const auto& basis, double t_basis) {
    io::save_basis(basis, out / "basis");
    io::write_json(out / "tree.json", io::tree_to_json(tree));
    io::write_eigenvalues_csv(out / "eigenvalues.csv", p.eigenvalues());
    print_accounting(basis);
    std::printf("timing: setup %.3fs, tree %.3fs, basis %.3fs\n", t_setup, t_tree, t_basis);
    std::printf("archive: %s.json / %s.bin\n", (out / "basis").string().c_str(), (out / "basis").string().c_str());
  };
  const auto t2 = std::chrono::steady_clock::now();
  if (p.field == Field::Real) {
    const auto basis = p.build<double>(tree);
    finish(basis, seconds_since(t2));
  } else {
    const auto basis = p.build<cdouble>(tree);
    finish(basis, seconds_since(t2));
  }
  return kExitOk;
}

struct DetectInputs {
  std::string basis;
  std::string signal;
  std::optional<double> t_M;
};

int cmd_detect(const Overrides& o, const DetectInputs& in) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  apply(o, c);
  if (in.t_M) c.t_M = *in.t_M;
  if (!in.basis.empty()) c.basis = in.basis;
  if (!in.signal.empty()) c.signal = in.signal;
  const fs::path out(c.out);
  if (c.basis.empty()) c.basis = (out / "basis").string();
  if (c.signal.empty()) throw std::invalid_argument("detect: no signal file (use --signal)");
  if (o.config.empty() && !c.t_M) throw std::invalid_argument("detect: without --config, --t-m is required");

  Mode mode = c.mode;
  double t_M = c.t_M.value_or(0.0);
  std::optional<IndicatorBasis> indicators;
  std::optional<Mesh> mesh;
  if (!o.config.empty()) {
    Problem p = assemble(c);
    t_M = p.t_M;
    indicators = p.indicators;
    mesh = p.mesh;
  }
  const auto signal = io::read_signal_csv(c.signal);
  const io::AnyBasis any = io::load_basis(c.basis);
  const double eps = c.epsilon.value_or(kDefaultEpsilon);
  DetectionReport report;
  std::visit(
      [&](const auto& basis) {
        using S = typename std::decay_t<decltype(basis.factors())>::value_type::scalar_type;
        const std::size_t N = basis.size();
        if (static_cast<std::size_t>(signal.values.size()) != N) {
          throw std::invalid_argument("detect: signal has " + std::to_string(signal.values.size()) +
                                      " samples, basis has " + std::to_string(N) + " cells");
        }
        if (mesh && mesh->size() != N) {
          throw std::invalid_argument("detect: configured mesh does not match the basis archive");
        }
        Vector<cdouble> fine = indicators ? project_signal<cdouble>(*indicators, signal.values) : signal.values;
        Vector<S> x;
        if constexpr (std::is_same_v<S, double>) {
          if (signal.complex && fine.imag().cwiseAbs().maxCoeff() > 0.0) {
            throw std::invalid_argument("detect: complex signal supplied to a real basis");
          }
          x = fine.real();
        } else {
          x = fine;
        }
        const auto mc = forward(basis, x);
        std::optional<SupportQuery> region;
        if (c.region) {
          region = resolve_region(parse_region(*c.region), basis.cell_points());
        }
        report = detect(basis, mc, t_M, eps, mode, region ? &*region : nullptr);
        io::write_report(out / "report.json", report);
        io::write_coefficients_csv(out / "coefficients.csv", basis, mc);
        io::save_coefficients(basis, mc, out / "coefficients");
        io::write_level_csvs(out, basis, mc);
      },
      any);
  print_report(report);
  return report.detected() ? kExitDetected : kExitOk;
}

int cmd_demo(const std::string& id, const Overrides& o) {
  nlohmann::json patch = o.config.empty() ? nlohmann::json::object() : io::read_json(o.config);
  RunConfig base = example_config(id);
  nlohmann::json cfg = config_to_json(base);
  cfg.merge_patch(patch);
  RunConfig c = parse_config(cfg, o.config.empty() ? fs::path() : fs::path(o.config).parent_path());
  apply(o, c);
  if (!o.out) c.out = "demo-" + id;
  const auto t0 = std::chrono::steady_clock::now();
  Problem p = assemble(c);
  const Vector<cdouble> v = p.simulate(c.seed);
  const Vector<cdouble> w = p.bump_values();
  const DemoResult r = run_problem(id, std::move(p), v, w);
  const double elapsed = seconds_since(t0);
  write_demo_outputs(r, c.out);
  std::visit([](const auto& run) { print_accounting(run.basis); }, r.run);
  std::printf("t_M = %.6g, ||u|| = %.6g\n", r.problem.t_M, r.u_norm);
  print_report(r.report);
  std::map<int, std::size_t> per_level;
  for (const auto& e : r.report.entries) {
    ++per_level[e.level];
  }
  for (const auto& [level, count] : per_level) {
    std::printf("  level %d: %zu entries\n", level, count);
  }
  std::printf("pipeline %.3fs; artifacts in %s\n", elapsed, c.out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel change detection for random fields on meshes"};
  app.require_subcommand(1);
  Overrides sim, bld, det, dem;
  add_common(app.add_subcommand("simulate", "write a realization of the configured model as a signal CSV"), sim, false);
  add_common(app.add_subcommand("build", "build the tree and multilevel basis and write the archive"), bld, false);
  auto* detect_cmd = app.add_subcommand("detect", "transform a signal and report detail coefficients above epsilon");
  add_common(detect_cmd, det, true);
  DetectInputs din;
  detect_cmd->add_option("--basis", din.basis, "basis archive prefix");
  detect_cmd->add_option("--signal", din.signal, "signal CSV");
  detect_cmd->add_option("--t-m", din.t_M, "truncation tail (defaults to the configured model's)");
  auto* demo_cmd = app.add_subcommand("demo", "run a built-in example end to end");
  std::string demo_id;
  demo_cmd->add_option("id", demo_id, "interval-smooth | interval-oscillatory | sphere")->required();
  add_common(demo_cmd, dem, true);
  auto* spec_cmd = app.add_subcommand("spectrum", "export the SFBM coefficients d_l");
  int l_max = 10;
  int order = 0;
  std::string spec_out = "spectrum.csv";
  spec_cmd->add_option("--l-max", l_max, "largest degree")->check(CLI::Range(1, 200));
  spec_cmd->add_option("--order", order, "quadrature order (0 = automatic)");
  spec_cmd->add_option("--out", spec_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }
  try {
    if (app.got_subcommand("simulate")) return cmd_simulate(sim);
    if (app.got_subcommand("build")) return cmd_build(bld);
    if (app.got_subcommand("detect")) return cmd_detect(det, din);
    if (app.got_subcommand("demo")) return cmd_demo(demo_id, dem);
    if (app.got_subcommand("spectrum")) {
      const auto s = sfbm_spectrum(l_max, order);
      io::write_spectrum_csv(spec_out, s);
      const auto counts = sfbm_mode_counts(s);
      std::printf("l_max = %d, quadrature order = %d\n", s.l_max, s.quadrature_order);
      std::printf("non-vanishing degrees give %zu modes including l = 0; %zu retained for l >= 1\n",
                  counts.nonvanishing, counts.retained);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
