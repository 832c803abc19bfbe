#include "mlcd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mlcd::io {

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) {
    return false;
  }
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::size_t as_index(double v, const fs::path& path, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw FormatError(path.string() + ": " + what + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t fnv1a(const std::vector<char>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// Raw little-endian doubles; complex values are stored as (re, im) pairs.
class Blob {
 public:
  std::size_t put(const double* data, std::size_t count) {
    const std::size_t at = size_;
    const auto* p = reinterpret_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + count * sizeof(double));
    size_ += count;
    return at;
  }
  template <typename Derived>
  std::size_t put(const Eigen::DenseBase<Derived>& m) {
    using S = typename Derived::Scalar;
    const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> copy = m;
    constexpr std::size_t k = std::is_same_v<S, double> ? 1 : 2;
    return put(reinterpret_cast<const double*>(copy.data()), static_cast<std::size_t>(copy.size()) * k);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
  std::size_t size_ = 0;
};

class BlobReader {
 public:
  BlobReader(std::vector<char> bytes, fs::path path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename S>
  Matrix<S> get(std::size_t offset, Eigen::Index rows, Eigen::Index cols) const {
    constexpr std::size_t k = std::is_same_v<S, double> ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(rows * cols) * k;
    if (offset + count > bytes_.size() / sizeof(double) || rows < 0 || cols < 0) {
      throw FormatError(path_.string() + ": blob range out of bounds");
    }
    Matrix<S> m(rows, cols);
    std::memcpy(reinterpret_cast<char*>(m.data()), bytes_.data() + offset * sizeof(double),
                count * sizeof(double));
    return m;
  }

 private:
  std::vector<char> bytes_;
  fs::path path_;
};

std::vector<char> read_bytes(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<char>& bytes) {
  auto out = open_out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

json blob_header(const fs::path& bin, const std::vector<char>& bytes) {
  return {{"file", bin.filename().string()}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}};
}

BlobReader load_blob(const fs::path& stem, const json& header) {
  const fs::path bin = stem.parent_path() / header.at("file").get<std::string>();
  auto bytes = read_bytes(bin);
  if (bytes.size() != header.at("bytes").get<std::size_t>() ||
      hex64(fnv1a(bytes)) != header.at("fnv1a64").get<std::string>()) {
    throw FormatError(bin.string() + ": size or checksum mismatch");
  }
  return {std::move(bytes), bin};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename Scalar>
json function_records(const MultilevelBasis<Scalar>& basis) {
  json records = json::array();
  const auto& root = basis.factor(0);
  for (std::size_t id = 0; id < basis.size(); ++id) {
    const auto s = basis.support_of(id);
    json r = {{"id", id}, {"cell", s.node}, {"support_lo", vec_json(s.lo)}, {"support_hi", vec_json(s.hi)}};
    if (basis.is_root_scaling(id)) {
      r["kind"] = "scaling";
      r["level"] = 0;
      r["local"] = id;
      r["column"] = id;
      r["inputs"] = root.inputs;
    } else {
      const auto& key = basis.details()[id - basis.root_dim()];
      const auto& f = basis.factor(key.node);
      r["kind"] = "detail";
      r["level"] = key.level;
      r["local"] = key.local;
      r["column"] = f.rank + key.local;
      r["inputs"] = f.inputs;
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  auto out = open_out(path);
  out << value.dump(1) << "\n";
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvTable table;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto cells = split(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        table.header = cells;
        first = false;
        continue;
      }
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    first = false;
    table.rows.push_back(std::move(row));
  }
  return table;
}

Eigen::MatrixXd read_snapshot_csv(const fs::path& path) {
  const auto t = read_csv(path);
  if (t.rows.empty()) {
    throw FormatError(path.string() + ": no samples");
  }
  const std::size_t N = t.rows.front().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t s = 0; s < t.rows.size(); ++s) {
    if (t.rows[s].size() != N) {
      throw FormatError(path.string() + ": ragged sample rows");
    }
    for (std::size_t i = 0; i < N; ++i) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = t.rows[s][i];
    }
  }
  return out;
}

void write_signal_csv(const fs::path& path, const Vector<cdouble>& values, bool complex) {
  auto out = open_out(path);
  out << (complex ? "id,value,value_imag\n" : "id,value\n");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out << i << "," << values[i].real();
    if (complex) {
      out << "," << values[i].imag();
    }
    out << "\n";
  }
}

Signal read_signal_csv(const fs::path& path) {
  const auto t = read_csv(path);
  Signal s;
  s.values = Vector<cdouble>::Zero(static_cast<Eigen::Index>(t.rows.size()));
  std::vector<char> seen(t.rows.size(), 0);
  for (const auto& r : t.rows) {
    if (r.size() < 2 || r.size() > 3) {
      throw FormatError(path.string() + ": expected id,value[,value_imag]");
    }
    const std::size_t id = as_index(r[0], path, "signal id");
    if (id >= t.rows.size() || seen[id]) {
      throw FormatError(path.string() + ": signal ids must be 0..N-1 without repeats");
    }
    seen[id] = 1;
    s.values[static_cast<Eigen::Index>(id)] = cdouble(r[1], r.size() == 3 ? r[2] : 0.0);
    s.complex = s.complex || r.size() == 3;
  }
  return s;
}

void write_mesh_csv(const fs::path& vertices, const fs::path& simplices, const SimplicialComplex& complex) {
  static const char* axes[] = {"x", "y", "z"};
  auto vout = open_out(vertices);
  vout << "id";
  for (int a = 0; a < complex.ambient_dim(); ++a) {
    vout << "," << (a < 3 ? axes[a] : ("x" + std::to_string(a)).c_str());
  }
  vout << "\n";
  for (std::size_t v = 0; v < complex.num_vertices(); ++v) {
    vout << v;
    for (int a = 0; a < complex.ambient_dim(); ++a) {
      vout << "," << complex.vertices()(a, static_cast<Eigen::Index>(v));
    }
    vout << "\n";
  }
  auto sout = open_out(simplices);
  sout << "id";
  for (int k = 0; k <= complex.simplex_dim(); ++k) {
    sout << ",v" << (k + 1);
  }
  sout << "\n";
  for (std::size_t s = 0; s < complex.size(); ++s) {
    sout << s;
    for (int k = 0; k <= complex.simplex_dim(); ++k) {
      sout << "," << complex.simplices()(k, static_cast<Eigen::Index>(s));
    }
    sout << "\n";
  }
}

SimplicialComplex read_mesh_csv(const fs::path& vertices, const fs::path& simplices) {
  const auto vt = read_csv(vertices);
  const auto st = read_csv(simplices);
  if (vt.rows.empty() || st.rows.empty()) {
    throw FormatError("mesh files must contain at least one vertex and one simplex");
  }
  const std::size_t d = vt.rows.front().size() - 1;
  const std::size_t k1 = st.rows.front().size() - 1;
  if (d < 1 || k1 < 2) {
    throw FormatError("mesh files: too few columns");
  }
  Eigen::MatrixXd V(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(vt.rows.size()));
  std::vector<char> seen(vt.rows.size(), 0);
  for (const auto& r : vt.rows) {
    if (r.size() != d + 1) {
      throw FormatError(vertices.string() + ": ragged rows");
    }
    const std::size_t id = as_index(r[0], vertices, "vertex id");
    if (id >= vt.rows.size() || seen[id]) {
      throw FormatError(vertices.string() + ": vertex ids must be 0..V-1 without repeats");
    }
    seen[id] = 1;
    for (std::size_t a = 0; a < d; ++a) {
      V(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(id)) = r[a + 1];
    }
  }
  Eigen::MatrixXi S(static_cast<Eigen::Index>(k1), static_cast<Eigen::Index>(st.rows.size()));
  seen.assign(st.rows.size(), 0);
  for (const auto& r : st.rows) {
    if (r.size() != k1 + 1) {
      throw FormatError(simplices.string() + ": ragged rows");
    }
    const std::size_t id = as_index(r[0], simplices, "simplex id");
    if (id >= st.rows.size() || seen[id]) {
      throw FormatError(simplices.string() + ": simplex ids must be 0..N-1 without repeats");
    }
    seen[id] = 1;
    for (std::size_t k = 0; k < k1; ++k) {
      S(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(id)) =
          static_cast<int>(as_index(r[k + 1], simplices, "vertex reference"));
    }
  }
  return SimplicialComplex(std::move(V), std::move(S));
}

void write_spectrum_csv(const fs::path& path, const SfbmSpectrum& spectrum) {
  auto out = open_out(path);
  out << "l,d_l\n";
  for (std::size_t l = 0; l < spectrum.d.size(); ++l) {
    out << l << "," << spectrum.d[l] << "\n";
  }
}

std::vector<double> read_spectrum_csv(const fs::path& path) {
  const auto t = read_csv(path);
  std::vector<double> d(t.rows.size(), 0.0);
  for (const auto& r : t.rows) {
    if (r.size() != 2) {
      throw FormatError(path.string() + ": expected l,d_l");
    }
    const std::size_t l = as_index(r[0], path, "l");
    if (l >= d.size()) {
      throw FormatError(path.string() + ": degrees must be 0..l_max");
    }
    d[l] = r[1];
  }
  return d;
}

void write_eigenvalues_csv(const fs::path& path, const std::vector<double>& eigenvalues) {
  auto out = open_out(path);
  out << "k,lambda\n";
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    out << (k + 1) << "," << eigenvalues[k] << "\n";
  }
}

std::vector<double> read_eigenvalues_csv(const fs::path& path) {
  const auto t = read_csv(path);
  std::vector<double> ev(t.rows.size(), 0.0);
  for (const auto& r : t.rows) {
    if (r.size() != 2) {
      throw FormatError(path.string() + ": expected k,lambda");
    }
    const std::size_t k = as_index(r[0], path, "k");
    if (k < 1 || k > ev.size()) {
      throw FormatError(path.string() + ": k must be 1..M");
    }
    ev[k - 1] = r[1];
  }
  return ev;
}

json tree_to_json(const KdTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    json j = {{"id", n.id},         {"level", n.level}, {"parent", n.parent}, {"axis", n.axis},
              {"threshold", n.threshold}, {"begin", n.begin},  {"end", n.end}};
    if (n.is_leaf()) {
      j["children"] = json::array();
      auto pts = tree.points_of(n.id);
      j["points"] = std::vector<std::size_t>(pts.begin(), pts.end());
    } else {
      j["children"] = {n.left, n.right};
    }
    nodes.push_back(std::move(j));
  }
  return {{"leaf_size", tree.leaf_size()},
          {"depth", tree.depth()},
          {"points", tree.num_points()},
          {"permutation", tree.permutation()},
          {"nodes", std::move(nodes)}};
}

KdTree tree_from_json(const json& value) {
  try {
    auto perm = value.at("permutation").get<std::vector<std::size_t>>();
    const std::size_t N = perm.size();
    std::vector<char> seen(N, 0);
    for (std::size_t p : perm) {
      if (p >= N || seen[p]) {
        throw FormatError("tree: permutation is not a permutation of 0..N-1");
      }
      seen[p] = 1;
    }
    std::vector<KdNode> nodes;
    for (const auto& j : value.at("nodes")) {
      KdNode n;
      n.id = j.at("id").get<int>();
      n.level = j.at("level").get<int>();
      n.parent = j.at("parent").get<int>();
      n.axis = j.at("axis").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.begin = j.at("begin").get<std::size_t>();
      n.end = j.at("end").get<std::size_t>();
      const auto ch = j.at("children").get<std::vector<int>>();
      if (ch.size() == 2) {
        n.left = ch[0];
        n.right = ch[1];
      } else if (!ch.empty()) {
        throw FormatError("tree: a node has zero or two children");
      }
      if (n.id != static_cast<int>(nodes.size()) || n.begin > n.end || n.end > N) {
        throw FormatError("tree: node ids or ranges are inconsistent");
      }
      nodes.push_back(n);
    }
    if (nodes.empty() || nodes[0].parent != -1 || nodes[0].begin != 0 || nodes[0].end != N ||
        nodes[0].level != 0) {
      throw FormatError("tree: malformed root");
    }
    const int count = static_cast<int>(nodes.size());
    for (const auto& n : nodes) {
      if (n.is_leaf()) {
        continue;
      }
      if (n.left <= n.id || n.right <= n.id || n.left >= count || n.right >= count) {
        throw FormatError("tree: child ids must follow their parent");
      }
      const auto& l = nodes[static_cast<std::size_t>(n.left)];
      const auto& r = nodes[static_cast<std::size_t>(n.right)];
      if (l.parent != n.id || r.parent != n.id || l.level != n.level + 1 || r.level != n.level + 1 ||
          l.begin != n.begin || l.end != r.begin || r.end != n.end) {
        throw FormatError("tree: child " + std::to_string(n.left) + "/" + std::to_string(n.right) +
                          " inconsistent with node " + std::to_string(n.id));
      }
    }
    return KdTree(std::move(nodes), std::move(perm), value.at("leaf_size").get<std::size_t>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("tree: ") + e.what());
  }
}

fs::path archive_stem(const fs::path& prefix) {
  fs::path p = prefix;
  if (p.extension() == ".json" || p.extension() == ".bin") {
    p.replace_extension();
  }
  return p;
}

template <typename Scalar>
void save_basis(const MultilevelBasis<Scalar>& basis, const fs::path& prefix) {
  const fs::path stem = archive_stem(prefix);
  const fs::path bin = fs::path(stem.string() + ".bin");
  Blob blob;
  json geometry = {{"points", blob.put(basis.cell_points())},
                   {"lo", blob.put(basis.cell_lo())},
                   {"hi", blob.put(basis.cell_hi())}};
  json factors = json::array();
  for (const auto& f : basis.factors()) {
    json j = {{"node", f.node}, {"inputs", f.inputs}, {"rank", f.rank}};
    j["sv_offset"] = blob.put(f.singular_values);
    j["sv_count"] = f.singular_values.size();
    j["v_offset"] = blob.put(f.v);
    factors.push_back(std::move(j));
  }
  json doc = {{"format", "mlcd-basis"},
              {"version", 1},
              {"field", to_string(basis.field())},
              {"cells", basis.size()},
              {"dim", basis.cell_points().rows()},
              {"modes", basis.num_modes()},
              {"rank_tol", basis.rank_tol()},
              {"root_dim", basis.root_dim()},
              {"levels", basis.levels()},
              {"geometry", std::move(geometry)},
              {"tree", tree_to_json(basis.tree())},
              {"factors", std::move(factors)},
              {"functions", function_records(basis)},
              {"warnings", basis.warnings()}};
  doc["blob"] = blob_header(bin, blob.bytes());
  write_bytes(bin, blob.bytes());
  write_json(fs::path(stem.string() + ".json"), doc);
}

namespace {

template <typename Scalar>
MultilevelBasis<Scalar> load_basis_as(const json& doc, const BlobReader& blob) {
  KdTree tree = tree_from_json(doc.at("tree"));
  const auto N = static_cast<Eigen::Index>(doc.at("cells").get<std::size_t>());
  const auto d = doc.at("dim").get<Eigen::Index>();
  if (static_cast<std::size_t>(N) != tree.num_points() || d < 1) {
    throw FormatError("basis: header does not match the tree");
  }
  const auto& g = doc.at("geometry");
  Eigen::MatrixXd points = blob.get<double>(g.at("points").get<std::size_t>(), d, N);
  Eigen::MatrixXd lo = blob.get<double>(g.at("lo").get<std::size_t>(), d, N);
  Eigen::MatrixXd hi = blob.get<double>(g.at("hi").get<std::size_t>(), d, N);
  const auto& fj = doc.at("factors");
  if (fj.size() != tree.size()) {
    throw FormatError("basis: one factor per tree node is required");
  }
  std::vector<LocalFactor<Scalar>> factors;
  for (const auto& j : fj) {
    LocalFactor<Scalar> f;
    f.node = j.at("node").get<int>();
    f.inputs = j.at("inputs").get<int>();
    f.rank = j.at("rank").get<int>();
    if (f.node != static_cast<int>(factors.size()) || f.inputs < 0 || f.rank < 0 || f.rank > f.inputs) {
      throw FormatError("basis: factor " + std::to_string(factors.size()) + " is inconsistent");
    }
    const auto& n = tree.node(f.node);
    int expected = static_cast<int>(n.count());
    if (!n.is_leaf()) {
      expected = static_cast<int>(fj.at(static_cast<std::size_t>(n.left)).at("rank").get<int>() +
                                  fj.at(static_cast<std::size_t>(n.right)).at("rank").get<int>());
    }
    if (f.inputs != expected) {
      throw FormatError("basis: factor " + std::to_string(f.node) + " input count does not match its children");
    }
    f.singular_values =
        blob.get<double>(j.at("sv_offset").get<std::size_t>(), j.at("sv_count").get<Eigen::Index>(), 1);
    f.v = blob.get<Scalar>(j.at("v_offset").get<std::size_t>(), f.inputs, f.inputs);
    factors.push_back(std::move(f));
  }
  MultilevelBasis<Scalar> basis(std::move(tree), std::move(factors), std::move(points), std::move(lo),
                                std::move(hi), doc.at("modes").get<std::size_t>(),
                                doc.at("rank_tol").get<double>());
  for (const auto& w : doc.at("warnings")) {
    basis.add_warning(w.get<std::string>());
  }
  if (basis.root_dim() != doc.at("root_dim").get<std::size_t>()) {
    throw FormatError("basis: root dimension mismatch");
  }
  return basis;
}

}  // namespace

AnyBasis load_basis(const fs::path& prefix) {
  const fs::path stem = archive_stem(prefix);
  const json doc = read_json(fs::path(stem.string() + ".json"));
  try {
    if (doc.at("format") != "mlcd-basis" || doc.at("version") != 1) {
      throw FormatError(stem.string() + ".json: not a basis archive");
    }
    const BlobReader blob = load_blob(stem, doc.at("blob"));
    if (doc.at("field") == "real") {
      return load_basis_as<double>(doc, blob);
    }
    if (doc.at("field") == "complex") {
      return load_basis_as<cdouble>(doc, blob);
    }
    throw FormatError(stem.string() + ".json: unknown field");
  } catch (const json::exception& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  }
}

template <typename Scalar>
void write_coefficients_csv(const fs::path& path, const MultilevelBasis<Scalar>& basis,
                            const MultilevelCoefficients<Scalar>& mc) {
  if (mc.size() != basis.size()) {
    throw std::invalid_argument("write_coefficients_csv: coefficients do not match the basis");
  }
  auto out = open_out(path);
  const auto d = basis.cell_points().rows();
  out << "level,cell,local_index,value_re,value_im";
  for (Eigen::Index a = 0; a < d; ++a) {
    out << ",support_min_" << a;
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    out << ",support_max_" << a;
  }
  out << "\n";
  for (std::size_t id = 0; id < basis.size(); ++id) {
    const auto s = basis.support_of(id);
    int level = -1;
    int local = static_cast<int>(id);
    if (!basis.is_root_scaling(id)) {
      const auto& key = basis.details()[id - basis.root_dim()];
      level = key.level;
      local = key.local;
    }
    const cdouble v(mc[id]);
    out << level << "," << s.node << "," << local << "," << v.real() << "," << v.imag();
    for (Eigen::Index a = 0; a < d; ++a) {
      out << "," << s.lo[a];
    }
    for (Eigen::Index a = 0; a < d; ++a) {
      out << "," << s.hi[a];
    }
    out << "\n";
  }
}

template <typename Scalar>
void save_coefficients(const MultilevelBasis<Scalar>& basis, const MultilevelCoefficients<Scalar>& mc,
                       const fs::path& prefix) {
  if (mc.size() != basis.size() || static_cast<std::size_t>(mc.root.size()) != basis.root_dim()) {
    throw std::invalid_argument("save_coefficients: coefficients do not match the basis");
  }
  const fs::path stem = archive_stem(prefix);
  const fs::path bin = fs::path(stem.string() + ".bin");
  Blob blob;
  const std::size_t root_offset = blob.put(mc.root);
  const std::size_t detail_offset = blob.put(mc.details);
  json records = json::array();
  for (std::size_t k = 0; k < basis.detail_count(); ++k) {
    const auto& key = basis.details()[k];
    records.push_back({{"id", basis.detail_id(k)}, {"level", key.level}, {"cell", key.node}, {"local", key.local}});
  }
  json doc = {{"format", "mlcd-coefficients"},
              {"version", 1},
              {"field", to_string(basis.field())},
              {"cells", basis.size()},
              {"root_dim", basis.root_dim()},
              {"detail_count", basis.detail_count()},
              {"root_offset", root_offset},
              {"detail_offset", detail_offset},
              {"details", std::move(records)}};
  doc["blob"] = blob_header(bin, blob.bytes());
  write_bytes(bin, blob.bytes());
  write_json(fs::path(stem.string() + ".json"), doc);
}

AnyCoefficients load_coefficients(const fs::path& prefix) {
  const fs::path stem = archive_stem(prefix);
  const json doc = read_json(fs::path(stem.string() + ".json"));
  try {
    if (doc.at("format") != "mlcd-coefficients" || doc.at("version") != 1) {
      throw FormatError(stem.string() + ".json: not a coefficient archive");
    }
    const BlobReader blob = load_blob(stem, doc.at("blob"));
    const auto r = doc.at("root_dim").get<Eigen::Index>();
    const auto n = doc.at("detail_count").get<Eigen::Index>();
    const auto ro = doc.at("root_offset").get<std::size_t>();
    const auto dof = doc.at("detail_offset").get<std::size_t>();
    if (doc.at("field") == "real") {
      return MultilevelCoefficients<double>{blob.get<double>(ro, r, 1), blob.get<double>(dof, n, 1)};
    }
    return MultilevelCoefficients<cdouble>{blob.get<cdouble>(ro, r, 1), blob.get<cdouble>(dof, n, 1)};
  } catch (const json::exception& e) {
    throw FormatError(stem.string() + ".json: " + e.what());
  }
}

template <typename Scalar>
std::vector<fs::path> write_level_csvs(const fs::path& dir, const MultilevelBasis<Scalar>& basis,
                                       const MultilevelCoefficients<Scalar>& mc) {
  static const char* axes[] = {"x", "y", "z"};
  std::vector<fs::path> written;
  const auto d = basis.cell_points().rows();
  for (int l = 0; l < basis.levels(); ++l) {
    const fs::path path = dir / ("level_" + std::to_string(l) + ".csv");
    auto out = open_out(path);
    out << "id,cell,local_index";
    for (Eigen::Index a = 0; a < d; ++a) {
      out << "," << (a < 3 ? axes[a] : ("x" + std::to_string(a)).c_str());
    }
    if (d == 3) {
      out << ",theta,phi";
    }
    out << ",value_re,value_im,abs_d\n";
    const auto [b, e] = basis.level_range(l);
    for (std::size_t k = b; k < e; ++k) {
      const std::size_t id = basis.detail_id(k);
      const auto& key = basis.details()[k];
      const Eigen::VectorXd c = basis.support_centroid(id);
      const cdouble v(mc.details[static_cast<Eigen::Index>(k)]);
      out << id << "," << key.node << "," << key.local;
      for (Eigen::Index a = 0; a < d; ++a) {
        out << "," << c[a];
      }
      if (d == 3) {
        const double r = c.norm();
        const auto [theta, phi] =
            r > 0.0 ? sphere_angles(std::span<const double>(Eigen::Vector3d(c / r).eval().data(), 3))
                    : std::pair<double, double>{0.0, 0.0};
        out << "," << theta << "," << phi;
      }
      out << "," << v.real() << "," << v.imag() << "," << std::abs(v) << "\n";
    }
    written.push_back(path);
  }
  return written;
}

json report_to_json(const DetectionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"level", e.level},
                       {"id", e.id},
                       {"cell", e.node},
                       {"local_index", e.local},
                       {"abs_d", e.abs_d},
                       {"value_re", e.value.real()},
                       {"value_im", e.value.imag()},
                       {"support",
                        {{"lo", vec_json(e.support_lo)},
                         {"hi", vec_json(e.support_hi)},
                         {"centroid", vec_json(e.centroid)},
                         {"cells", e.support_cells}}}});
  }
  json doc = {{"S", r.S},
              {"lo", r.interval.lo},
              {"hi", r.interval.unbounded ? json(nullptr) : json(r.interval.hi)},
              {"hi_unbounded", r.interval.unbounded},
              {"t_M", r.t_M},
              {"epsilon", r.epsilon},
              {"mode", r.mode},
              {"field", r.field},
              {"cells", r.cells},
              {"modes", r.modes},
              {"levels", r.levels},
              {"detected", r.detected()},
              {"entries", std::move(entries)}};
  if (r.region) {
    doc["region"] = *r.region;
  }
  return doc;
}

DetectionReport report_from_json(const json& j) {
  try {
    DetectionReport r;
    r.S = j.at("S").get<double>();
    r.interval.lo = j.at("lo").get<double>();
    r.interval.unbounded = j.at("hi_unbounded").get<bool>();
    r.interval.hi = r.interval.unbounded ? std::numeric_limits<double>::infinity() : j.at("hi").get<double>();
    r.t_M = j.at("t_M").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.mode = j.at("mode").get<std::string>();
    r.field = j.at("field").get<std::string>();
    r.cells = j.at("cells").get<std::size_t>();
    r.modes = j.at("modes").get<std::size_t>();
    r.levels = j.at("levels").get<int>();
    if (j.contains("region")) {
      r.region = j.at("region").get<std::string>();
    }
    for (const auto& e : j.at("entries")) {
      LocalizationEntry x;
      x.level = e.at("level").get<int>();
      x.id = e.at("id").get<std::size_t>();
      x.node = e.at("cell").get<int>();
      x.local = e.at("local_index").get<int>();
      x.abs_d = e.at("abs_d").get<double>();
      x.value = cdouble(e.at("value_re").get<double>(), e.at("value_im").get<double>());
      const auto& s = e.at("support");
      x.support_lo = json_vec(s.at("lo"));
      x.support_hi = json_vec(s.at("hi"));
      x.centroid = json_vec(s.at("centroid"));
      x.support_cells = s.at("cells").get<std::size_t>();
      r.entries.push_back(std::move(x));
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

void write_report(const fs::path& path, const DetectionReport& report) { write_json(path, report_to_json(report)); }

DetectionReport read_report(const fs::path& path) { return report_from_json(read_json(path)); }

template void save_basis(const MultilevelBasis<double>&, const fs::path&);
template void save_basis(const MultilevelBasis<cdouble>&, const fs::path&);
template void write_coefficients_csv(const fs::path&, const MultilevelBasis<double>&,
                                     const MultilevelCoefficients<double>&);
template void write_coefficients_csv(const fs::path&, const MultilevelBasis<cdouble>&,
                                     const MultilevelCoefficients<cdouble>&);
template void save_coefficients(const MultilevelBasis<double>&, const MultilevelCoefficients<double>&,
                                const fs::path&);
template void save_coefficients(const MultilevelBasis<cdouble>&, const MultilevelCoefficients<cdouble>&,
                                const fs::path&);
template std::vector<fs::path> write_level_csvs(const fs::path&, const MultilevelBasis<double>&,
                                                const MultilevelCoefficients<double>&);
template std::vector<fs::path> write_level_csvs(const fs::path&, const MultilevelBasis<cdouble>&,
                                                const MultilevelCoefficients<cdouble>&);

}  // namespace mlcd::io
