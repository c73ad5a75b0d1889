#include "qlustering/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qlustering/csv.hpp"

namespace qlustering {
namespace {

constexpr std::array<const char*, 55> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni",
    "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo",
    "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs"};

// Column order of the numeric fields on a QM9 "gdb" comment line.
constexpr std::array<const char*, 16> kQm9Properties = {
    "index", "A", "B", "C", "mu", "alpha", "homo", "lumo",
    "gap",   "r2", "zpve", "U0", "U", "H", "G", "Cv"};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string canonical_name(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-' || c == '.') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

Eigen::VectorXd uniform_on_sphere(int d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = gauss(rng);
    const double norm = u.norm();
    if (norm > 1e-12) return u / norm;
  }
}

Eigen::VectorXd exponential_profile(int length, double xi) {
  Eigen::VectorXd a(length);
  for (int i = 0; i < length; ++i) a(i) = std::exp(-static_cast<double>(i) / xi);
  return a / a.norm();
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& msg) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

void read_xyz_stream(std::istream& in, const std::filesystem::path& path,
                     std::vector<MoleculeRecord>& out) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    long count = 0;
    {
      const std::string t = trim(line);
      std::size_t used = 0;
      try {
        count = std::stol(t, &used);
      } catch (const std::exception&) {
        parse_fail(path, lineno, "expected atom count, got '" + t + "'");
      }
      if (used != t.size() || count < 1) {
        parse_fail(path, lineno, "malformed atom count '" + t + "'");
      }
    }
    MoleculeRecord rec;
    rec.name = path.stem().string() + "#" + std::to_string(out.size());
    if (!std::getline(in, line)) parse_fail(path, lineno + 1, "missing comment line");
    ++lineno;
    const auto toks = tokens(line);
    const bool qm9 = !toks.empty() && toks.front() == "gdb";
    if (qm9) {
      for (std::size_t k = 1; k < toks.size() && k - 1 < kQm9Properties.size(); ++k) {
        double v = 0.0;
        if (!csv::parse_double(toks[k], v)) {
          parse_fail(path, lineno, "non-numeric QM9 property '" + toks[k] + "'");
        }
        rec.properties.emplace_back(kQm9Properties[k - 1], v);
      }
      if (!rec.properties.empty()) {
        rec.name = "gdb_" + toks[1];
      }
    } else {
      for (const auto& tok : toks) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "name") {
          rec.name = value;
          continue;
        }
        double v = 0.0;
        if (csv::parse_double(value, v)) rec.properties.emplace_back(key, v);
      }
    }
    for (long a = 0; a < count; ++a) {
      if (!std::getline(in, line)) parse_fail(path, lineno + 1, "unexpected end of file");
      ++lineno;
      const auto cols = tokens(line);
      if (cols.size() < 4) parse_fail(path, lineno, "atom line needs element x y z");
      Atom atom;
      try {
        atom.z = atomic_number(cols[0]);
      } catch (const ParseError& e) {
        parse_fail(path, lineno, e.what());
      }
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        if (!csv::parse_double(cols[static_cast<std::size_t>(c) + 1], v) || !std::isfinite(v)) {
          parse_fail(path, lineno, "non-numeric coordinate '" + cols[static_cast<std::size_t>(c) + 1] + "'");
        }
        atom.position(c) = v;
      }
      rec.atoms.push_back(atom);
    }
    out.push_back(std::move(rec));
    // Native QM9 files carry frequency/SMILES/InChI trailers after the atoms.
    if (qm9) return;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<InputState> Dataset::input_states() const {
  std::vector<InputState> out;
  out.reserve(states.size());
  for (const auto& s : states) out.emplace_back(s);
  return out;
}

Eigen::VectorXd normalize_to_state(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 1e-12)) throw DimensionError("cannot normalize a zero vector");
  return v / norm;
}

std::vector<Eigen::VectorXd> base_points_2d() {
  const double s = 1.0 / std::sqrt(2.0);
  return {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(s, s), Eigen::Vector2d(0.0, 1.0)};
}

std::vector<Eigen::VectorXd> base_points_3d() {
  return {Eigen::Vector3d(0.0, 1.0, 0.0), Eigen::Vector3d(0.0, 0.0, 1.0),
          Eigen::Vector3d(1.0, 0.0, 0.0),
          (2.0 * std::sqrt(3.0) / 9.0) * Eigen::Vector3d(-1.5, 1.5, 1.5),
          (2.0 / std::sqrt(13.0)) * Eigen::Vector3d(0.0, 1.0, 1.5)};
}

Dataset gen_sphere_clusters(std::span<const Eigen::VectorXd> base_points, int n,
                            double omega, Rng& rng, std::vector<std::string>* warnings) {
  if (base_points.empty()) throw DimensionError("need at least one base point");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ConfigError("omega must lie in [0, 1]");
  if (n < 1) throw ConfigError("need at least one sample");
  const int q = static_cast<int>(base_points.size());
  const int d = static_cast<int>(base_points.front().size());
  for (const auto& b : base_points) {
    if (b.size() != d) throw DimensionError("base points have mixed dimensions");
    if (std::abs(b.norm() - 1.0) > 1e-12) throw DimensionError("base points must be unit norm");
  }
  if (n % q != 0 && warnings) {
    warnings->push_back("N = " + std::to_string(n) + " not divisible by q = " +
                        std::to_string(q) + "; remainder dealt round-robin");
  }

  Dataset ds;
  std::vector<int> truth;
  for (int g = 0; g < q; ++g) {
    const int size = n / q + (g < n % q ? 1 : 0);
    for (int k = 0; k < size; ++k) {
      Eigen::VectorXd v;
      do {
        v = (1.0 - omega) * base_points[static_cast<std::size_t>(g)] +
            omega * uniform_on_sphere(d, rng);
      } while (v.norm() <= 1e-12);
      ds.states.push_back(normalize_to_state(v));
      truth.push_back(g);
    }
  }
  ds.truth = Partition(std::move(truth));
  ds.meta.resize(ds.states.size());
  return ds;
}

double ipr(const Eigen::VectorXd& psi) {
  if (psi.size() == 0) throw DimensionError("ipr of empty vector");
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-9) throw DimensionError("ipr needs a unit vector");
  const double value = 1.0 / psi.array().pow(4).sum();
  if (value < 1.0 - 1e-9 || value > static_cast<double>(psi.size()) + 1e-9) {
    throw DimensionError("ipr out of [1, L]; input is not normalized");
  }
  return value;
}

Eigen::VectorXd gen_ipr_state(int length, double ipr_target, double tol, Rng& rng) {
  if (length < 1) throw DimensionError("ipr state length must be >= 1");
  if (!(ipr_target >= 1.0 && ipr_target <= length)) {
    throw ConfigError("ipr target must lie in [1, L]");
  }
  if (!(tol > 0.0)) throw ConfigError("ipr tolerance must be > 0");

  Eigen::VectorXd profile;
  if (ipr_target >= length - tol) {
    profile = Eigen::VectorXd::Constant(length, 1.0 / std::sqrt(static_cast<double>(length)));
  } else if (ipr_target <= 1.0 + tol) {
    profile = Eigen::VectorXd::Unit(length, 0);
  } else {
    double lo = std::log(1e-3);
    double hi = std::log(1e6);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      profile = exponential_profile(length, std::exp(mid));
      const double value = ipr(profile);
      if (std::abs(value - ipr_target) <= 0.1 * tol) break;
      (value < ipr_target ? lo : hi) = mid;
    }
    if (std::abs(ipr(profile) - ipr_target) > tol) {
      throw ConfigError("could not reach requested ipr within tolerance");
    }
  }

  std::vector<int> order(static_cast<std::size_t>(length));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution flip(0.5);
  Eigen::VectorXd out(length);
  for (int i = 0; i < length; ++i) {
    out(order[static_cast<std::size_t>(i)]) = flip(rng) ? -profile(i) : profile(i);
  }
  return out;
}

IprBands ipr_bands(int length, double gap) {
  const double span = static_cast<double>(length) - 1.0;
  if (!(gap >= 0.0 && gap < span)) throw ConfigError("ipr gap must lie in [0, L - 1)");
  const double width = 0.5 * (span - gap);
  return {1.0, 1.0 + width, static_cast<double>(length) - width, static_cast<double>(length)};
}

Dataset gen_ipr_dataset(int length, int n, double gap, double tol, Rng& rng) {
  if (n < 2) throw ConfigError("ipr dataset needs at least 2 samples");
  const IprBands bands = ipr_bands(length, gap);
  Dataset ds;
  std::vector<int> truth;
  const int per_class[2] = {n - n / 2, n / 2};
  for (int cls = 0; cls < 2; ++cls) {
    const double lo = cls == 0 ? bands.low_lo : bands.high_lo;
    const double hi = cls == 0 ? bands.low_hi : bands.high_hi;
    std::uniform_real_distribution<double> target(lo, hi);
    for (int k = 0; k < per_class[cls]; ++k) {
      const double t = target(rng);
      ds.states.push_back(gen_ipr_state(length, t, tol, rng));
      truth.push_back(cls);
      ds.meta.push_back({{"ipr_target", csv::format_double(t)}});
    }
  }
  ds.truth = Partition(std::move(truth));
  return ds;
}

// ---------------------------------------------------------------------------
// Molecules

std::optional<double> MoleculeRecord::property(const std::string& key) const {
  for (const auto& [k, v] : properties) {
    if (k == key) return v;
  }
  return std::nullopt;
}

int atomic_number(const std::string& symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    if (symbol == kElements[i]) return static_cast<int>(i) + 1;
  }
  throw ParseError("unknown element symbol '" + symbol + "'");
}

std::string element_symbol(int z) {
  if (z < 1 || z > static_cast<int>(kElements.size())) {
    throw ParseError("no element symbol for Z = " + std::to_string(z));
  }
  return kElements[static_cast<std::size_t>(z) - 1];
}

Eigen::VectorXd sid_distances(const MoleculeRecord& mol, int pad_len) {
  std::vector<Eigen::Vector3d> heavy;
  for (const auto& a : mol.atoms) {
    if (!a.position.allFinite()) throw DimensionError(mol.name + ": non-finite coordinates");
    if (a.z != 1) heavy.push_back(a.position);
  }
  if (heavy.size() < 2) {
    throw DimensionError(mol.name + ": SID needs at least 2 non-hydrogen atoms");
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < heavy.size(); ++i) {
    for (std::size_t j = i + 1; j < heavy.size(); ++j) d.push_back((heavy[i] - heavy[j]).norm());
  }
  if (static_cast<int>(d.size()) > pad_len) {
    throw TooManyPairs(mol.name + ": " + std::to_string(d.size()) +
                       " heavy-atom pairs exceed fingerprint length " +
                       std::to_string(pad_len));
  }
  std::sort(d.begin(), d.end());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pad_len);
  for (std::size_t i = 0; i < d.size(); ++i) out(static_cast<Eigen::Index>(i)) = d[i];
  return out;
}

Eigen::VectorXd sid_fingerprint(const MoleculeRecord& mol, int pad_len) {
  return normalize_to_state(sid_distances(mol, pad_len));
}

std::vector<MoleculeRecord> load_xyz(const std::filesystem::path& path) {
  std::vector<MoleculeRecord> out;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".xyz") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto part = load_xyz(f);
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return out;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  read_xyz_stream(in, path, out);
  return out;
}

void write_xyz(const std::filesystem::path& path, std::span<const MoleculeRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& rec : records) {
    out << rec.atoms.size() << '\n';
    out << "name=" << rec.name;
    for (const auto& [k, v] : rec.properties) out << ' ' << k << '=' << csv::format_double(v);
    out << '\n';
    for (const auto& a : rec.atoms) {
      out << element_symbol(a.z);
      for (int c = 0; c < 3; ++c) out << ' ' << csv::format_double(a.position(c));
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset molecules_to_dataset(std::span<const MoleculeRecord> records, int pad_len) {
  Dataset ds;
  for (const auto& rec : records) {
    Eigen::VectorXd d = sid_distances(rec, pad_len);
    ds.states.push_back(normalize_to_state(d));
    ds.features.push_back(std::move(d));
    std::map<std::string, std::string> meta{{"name", rec.name}};
    for (const auto& [k, v] : rec.properties) meta[k] = csv::format_double(v);
    ds.meta.push_back(std::move(meta));
  }
  for (int i = 0; i < pad_len; ++i) ds.feature_names.push_back("sid" + std::to_string(i));
  return ds;
}

Partition binarize_property(std::span<const double> values, std::vector<std::string>* warnings) {
  if (values.size() < 2) throw DimensionError("binarize_property needs at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  if (sorted.front() == sorted.back() && warnings) {
    warnings->push_back("property is constant; all samples assigned to class 0");
  }
  std::vector<int> labels;
  labels.reserve(values.size());
  for (double v : values) labels.push_back(v > median ? 1 : 0);
  return Partition(std::move(labels));
}

// ---------------------------------------------------------------------------
// Iris

Dataset load_iris(const std::filesystem::path& path,
                  const std::set<std::string>& drop_features) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ParseError(path.string() + ": empty file");
  const auto& header = rows.front();
  if (header.size() != 5) {
    throw ParseError(path.string() + ":1: expected 4 feature columns and a species column");
  }
  std::set<std::string> drop;
  for (const auto& d : drop_features) drop.insert(canonical_name(d));
  std::vector<int> keep;
  Dataset ds;
  for (int c = 0; c < 4; ++c) {
    if (drop.erase(canonical_name(header[static_cast<std::size_t>(c)])) == 0) {
      keep.push_back(c);
      ds.feature_names.push_back(trim(header[static_cast<std::size_t>(c)]));
    }
  }
  if (!drop.empty()) throw ConfigError("unknown iris feature in drop list: " + *drop.begin());
  if (keep.empty()) throw ConfigError("cannot drop every iris feature");

  std::vector<std::string> species;
  std::vector<int> truth;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + ":" + std::to_string(r + 1) + ": ";
    if (row.size() != 5) throw ParseError(where + "expected 5 fields");
    Eigen::VectorXd v(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      double x = 0.0;
      if (!csv::parse_double(row[static_cast<std::size_t>(keep[k])], x)) {
        throw ParseError(where + "non-numeric feature '" + row[static_cast<std::size_t>(keep[k])] + "'");
      }
      v(static_cast<Eigen::Index>(k)) = x;
    }
    const std::string name = trim(row[4]);
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) {
      species.push_back(name);
      it = species.end() - 1;
    }
    truth.push_back(static_cast<int>(it - species.begin()));
    ds.states.push_back(normalize_to_state(v));
    ds.features.push_back(std::move(v));
    ds.meta.push_back({{"species", name}});
  }
  ds.truth = Partition(std::move(truth));
  return ds;
}

// ---------------------------------------------------------------------------
// CSV export

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"id"};
  for (int i = 0; i < ds.dimension(); ++i) header.push_back("x" + std::to_string(i));
  header.push_back("truth");
  rows.push_back(std::move(header));
  for (std::size_t n = 0; n < ds.size(); ++n) {
    std::vector<std::string> row{std::to_string(n)};
    for (Eigen::Index i = 0; i < ds.states[n].size(); ++i) {
      row.push_back(csv::format_double(ds.states[n](i)));
    }
    row.push_back(ds.truth ? std::to_string((*ds.truth)[n]) : "");
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ParseError(path.string() + ": empty file");
  const std::size_t width = rows.front().size();
  if (width < 3 || rows.front().front() != "id" || rows.front().back() != "truth") {
    throw ParseError(path.string() + ":1: expected header id,x0..,truth");
  }
  Dataset ds;
  std::vector<int> truth;
  bool has_truth = true;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + ":" + std::to_string(r + 1) + ": ";
    if (row.size() != width) throw ParseError(where + "wrong number of fields");
    Eigen::VectorXd v(static_cast<Eigen::Index>(width - 2));
    for (std::size_t c = 1; c + 1 < width; ++c) {
      double x = 0.0;
      if (!csv::parse_double(row[c], x)) throw ParseError(where + "non-numeric value");
      v(static_cast<Eigen::Index>(c - 1)) = x;
    }
    ds.states.push_back(normalize_to_state(v));
    if (row.back().empty()) {
      has_truth = false;
    } else {
      double t = 0.0;
      if (!csv::parse_double(row.back(), t) || t < 0) throw ParseError(where + "bad truth id");
      truth.push_back(static_cast<int>(t));
    }
  }
  if (has_truth && !truth.empty()) ds.truth = Partition(std::move(truth));
  ds.meta.resize(ds.states.size());
  return ds;
}

}  // namespace qlustering
