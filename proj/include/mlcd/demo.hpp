#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mlcd/detect.hpp"
#include "mlcd/pipeline.hpp"
#include "mlcd/transform.hpp"

namespace mlcd {

template <typename Scalar>
struct DemoRun {
  MultilevelBasis<Scalar> basis;
  MultilevelCoefficients<Scalar> coefficients;
};

struct DemoResult {
  std::string id;
  Problem problem;
  KdTree tree;
  std::variant<DemoRun<double>, DemoRun<cdouble>> run;
  Vector<cdouble> v;  // realization of the truncated model
  Vector<cdouble> w;  // bump
  Vector<cdouble> u;  // v + w
  double u_norm = 0.0;
  DetectionReport report;
  std::vector<std::filesystem::path> files;
};

/// "interval-smooth", "interval-oscillatory" or "sphere".
const std::vector<std::string>& example_ids();
RunConfig example_config(const std::string& id);

/// Applies `overrides` (a JSON merge patch over the example's config) and the
/// seed, runs the full pipeline, and writes artifacts into `out` when given.
DemoResult run_example(const std::string& id, const nlohmann::json& overrides = nlohmann::json::object(),
                       std::optional<std::uint64_t> seed = std::nullopt,
                       const std::optional<std::filesystem::path>& out = std::nullopt);

/// Builds, transforms and detects on an assembled problem with given cell values.
DemoResult run_problem(const std::string& id, Problem problem, const Vector<cdouble>& v, const Vector<cdouble>& w);

std::vector<std::filesystem::path> write_demo_outputs(const DemoResult& result, const std::filesystem::path& out);

}  // namespace mlcd
