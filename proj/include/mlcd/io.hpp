#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mlcd/detect.hpp"
#include "mlcd/kdtree.hpp"
#include "mlcd/kl_models.hpp"
#include "mlcd/mesh.hpp"
#include "mlcd/mlb.hpp"
#include "mlcd/transform.hpp"

namespace mlcd::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

/// Numeric CSV table; a leading non-numeric row is treated as a header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const fs::path& path);

/// Samples one realization per row, one column per cell; returns N x S.
Eigen::MatrixXd read_snapshot_csv(const fs::path& path);

// Signals: "id,value[,value_imag]" with ids 0..N-1.
struct Signal {
  Vector<cdouble> values;
  bool complex = false;
};
void write_signal_csv(const fs::path& path, const Vector<cdouble>& values, bool complex);
Signal read_signal_csv(const fs::path& path);

// Meshes: vertices.csv "id,x,y[,z]" and simplices.csv "id,v1,..,v{k+1}".
void write_mesh_csv(const fs::path& vertices, const fs::path& simplices, const SimplicialComplex& complex);
SimplicialComplex read_mesh_csv(const fs::path& vertices, const fs::path& simplices);

void write_spectrum_csv(const fs::path& path, const SfbmSpectrum& spectrum);
std::vector<double> read_spectrum_csv(const fs::path& path);  // d_0..d_lmax
void write_eigenvalues_csv(const fs::path& path, const std::vector<double>& eigenvalues);
std::vector<double> read_eigenvalues_csv(const fs::path& path);

json tree_to_json(const KdTree& tree);
/// Rebuilds and structurally validates a tree dump.
KdTree tree_from_json(const json& value);

using AnyBasis = std::variant<MultilevelBasis<double>, MultilevelBasis<cdouble>>;
using AnyCoefficients = std::variant<MultilevelCoefficients<double>, MultilevelCoefficients<cdouble>>;

/// `prefix` names the archive pair <prefix>.json / <prefix>.bin; a trailing
/// ".json" or ".bin" is ignored.
fs::path archive_stem(const fs::path& prefix);

template <typename Scalar>
void save_basis(const MultilevelBasis<Scalar>& basis, const fs::path& prefix);
AnyBasis load_basis(const fs::path& prefix);

template <typename Scalar>
void write_coefficients_csv(const fs::path& path, const MultilevelBasis<Scalar>& basis,
                            const MultilevelCoefficients<Scalar>& mc);
template <typename Scalar>
void save_coefficients(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc,
                       const fs::path& prefix);
AnyCoefficients load_coefficients(const fs::path& prefix);

/// One CSV per detail level: support centroid coordinates then the coefficient.
template <typename Scalar>
std::vector<fs::path> write_level_csvs(const fs::path& dir, const MultilevelBasis<Scalar>& basis,
                                       const MultilevelCoefficients<Scalar>& mc);

json report_to_json(const DetectionReport& report);
DetectionReport report_from_json(const json& value);
void write_report(const fs::path& path, const DetectionReport& report);
DetectionReport read_report(const fs::path& path);

}  // namespace mlcd::io
