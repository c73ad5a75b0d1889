#include "qlustering/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "qlustering/csv.hpp"
#include "qlustering/metrics.hpp"
#include "qlustering/parallel.hpp"
#include "qlustering/svg.hpp"

namespace qlustering::experiment {

using nlohmann::json;

namespace {

// Reads one JSON object, rejecting unknown keys and mistyped values.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      const auto x = v->get<std::int64_t>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        fail(key, "a 32-bit integer");
      }
      out = static_cast<int>(x);
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        fail(key, "a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::vector<std::string>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void read(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  const json* child(const char* key) { return take(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key " + where_ + "." + k);
    }
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(path(key) + " must be " + what);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string cost_name(CostKind k) {
  return k == CostKind::clustering ? "clustering" : "localization";
}
std::string mode_name(CurrentMode m) { return m == CurrentMode::raw ? "raw" : "normalized"; }

bool is_one_of(const std::string& s, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

std::optional<double> finite_or_null(double v) {
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v) { return csv::format_double(v); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json envelope(const ExperimentConfig& config, const char* command) {
  return json{{"tool", "qlustering"},
              {"version", kVersion},
              {"schema_version", kSchemaVersion},
              {"command", command},
              {"config", to_json(config)}};
}

std::vector<std::string> node_names(const NetworkTopology& topo) {
  std::vector<std::string> names;
  for (int i = 0; i < topo.inputs(); ++i) names.push_back("in" + std::to_string(i));
  for (int i = 0; i < topo.hidden(); ++i) names.push_back("hid" + std::to_string(i));
  for (int i = 0; i < topo.outputs(); ++i) names.push_back("out" + std::to_string(i));
  return names;
}

void write_labels_csv(const std::filesystem::path& path, const Partition& labels,
                      const std::optional<Partition>& truth,
                      const std::vector<Eigen::VectorXd>* currents) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"id", "label", "truth"};
  const int q = currents && !currents->empty() ? static_cast<int>(currents->front().size()) : 0;
  for (int r = 0; r < q; ++r) header.push_back("j" + std::to_string(r));
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::string> row{std::to_string(i), std::to_string(labels[i]),
                                 truth ? std::to_string((*truth)[i]) : ""};
    for (int r = 0; r < q; ++r) row.push_back(fmt((*currents)[i](r)));
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"node"};
  header.insert(header.end(), names.begin(), names.end());
  rows.push_back(std::move(header));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(fmt(m(i, j)));
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

// Internal (and, with truth, external) scores of one partition.
json score_partition(const Partition& labels, const std::optional<Partition>& truth,
                     std::span<const Eigen::VectorXd> points) {
  json s;
  s["clusters_used"] = labels.cluster_count();
  if (truth) {
    s["ri"] = rand_index(*truth, labels);
    s["ari"] = adjusted_rand_index(*truth, labels);
  } else {
    s["ri"] = nullptr;
    s["ari"] = nullptr;
  }
  s["cp"] = compactness(points, labels);
  try {
    s["dvi"] = opt(finite_or_null(dunn_index(points, labels)));
  } catch (const Error&) {
    s["dvi"] = nullptr;
  }
  s["silhouette"] = labels.cluster_count() >= 2 ? json(silhouette(points, labels)) : json(nullptr);
  return s;
}

double mean_of(const std::vector<json>& scores, const char* key, bool& present) {
  double total = 0.0;
  int count = 0;
  for (const auto& s : scores) {
    if (s.contains(key) && s[key].is_number()) {
      total += s[key].get<double>();
      ++count;
    }
  }
  present = count > 0;
  return count ? total / count : 0.0;
}

json mean_scores(const std::vector<json>& scores) {
  json out;
  for (const char* key : {"clusters_used", "ri", "ari", "cp", "dvi", "silhouette"}) {
    bool present = false;
    const double m = mean_of(scores, key, present);
    out[key] = present ? json(m) : json(nullptr);
  }
  return out;
}

std::vector<double> property_values(const Dataset& data, const std::string& key) {
  std::vector<double> values;
  for (const auto& meta : data.meta) {
    const auto it = meta.find(key);
    double v = 0.0;
    if (it == meta.end() || !csv::parse_double(it->second, v)) return {};
    values.push_back(v);
  }
  return values;
}

// Numeric properties carried by every molecule, in name order.
std::vector<std::string> common_properties(const Dataset& data) {
  std::vector<std::string> keys;
  if (data.meta.empty()) return keys;
  for (const auto& [k, v] : data.meta.front()) {
    if (k == "name" || k == "index") continue;
    if (!property_values(data, k).empty()) keys.push_back(k);
  }
  return keys;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (!is_one_of(dataset.family, {"sphere", "ipr", "iris", "xyz", "csv"})) {
    throw ConfigError("dataset.family must be one of sphere, ipr, iris, xyz, csv");
  }
  if (dataset.family == "sphere") {
    if (dataset.dim < 2) throw ConfigError("dataset.dim must be >= 2");
    if (dataset.clusters < 1) throw ConfigError("dataset.clusters must be >= 1");
    const int limit = dataset.dim == 2 ? 3 : dataset.dim == 3 ? 5 : dataset.dim;
    if (dataset.clusters > limit) {
      throw ConfigError("dataset.clusters exceeds the " + std::to_string(limit) +
                        " base points available in dimension " + std::to_string(dataset.dim));
    }
  }
  if (!(dataset.omega >= 0.0 && dataset.omega <= 1.0)) {
    throw ConfigError("dataset.omega must lie in [0, 1]");
  }
  if (dataset.family == "sphere" || dataset.family == "ipr") {
    if (dataset.samples < 1) throw ConfigError("dataset.samples must be >= 1");
  }
  if (dataset.family == "ipr" && dataset.length < 2) {
    throw ConfigError("dataset.length must be >= 2");
  }
  if (is_one_of(dataset.family, {"iris", "xyz", "csv"}) && dataset.path.empty()) {
    throw ConfigError("dataset.path is required for family " + dataset.family);
  }
  if (dataset.pad_len < 1) throw ConfigError("dataset.pad_len must be >= 1");
  if (topology.inputs < 0 || topology.hidden < 0 || topology.outputs < 0) {
    throw ConfigError("topology sizes must be >= 0");
  }
  if (topology.outputs != 0 && topology.outputs != fit.clusters) {
    throw ConfigError("topology.outputs must equal fit.clusters");
  }
  fit.validate();
  rates.validate();
  KMeansConfig km = kmeans;
  if (km.k == 0) km.k = fit.clusters;
  km.validate();
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!is_one_of(feature_space, {"normalized", "raw", "standardized"})) {
    throw ConfigError("feature_space must be normalized, raw or standardized");
  }
  if (!is_one_of(sweep.parameter, {"omega", "gap", "hidden", "gamma_in", "gamma_out"})) {
    throw ConfigError("sweep.parameter must be omega, gap, hidden, gamma_in or gamma_out");
  }
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader root(j, "config");
  root.read("schema_version", c.schema_version);
  if (const json* d = root.child("dataset")) {
    ObjectReader r(*d, "dataset");
    r.read("family", c.dataset.family);
    r.read("dim", c.dataset.dim);
    r.read("clusters", c.dataset.clusters);
    r.read("samples", c.dataset.samples);
    r.read("omega", c.dataset.omega);
    r.read("length", c.dataset.length);
    r.read("gap", c.dataset.gap);
    r.read("ipr_tol", c.dataset.ipr_tol);
    r.read("path", c.dataset.path);
    r.read("drop_features", c.dataset.drop_features);
    r.read("pad_len", c.dataset.pad_len);
    r.read("truth_property", c.dataset.truth_property);
    r.read("seed", c.dataset.seed);
    r.finish();
  }
  if (const json* t = root.child("topology")) {
    ObjectReader r(*t, "topology");
    r.read("inputs", c.topology.inputs);
    r.read("hidden", c.topology.hidden);
    r.read("outputs", c.topology.outputs);
    r.read("hidden_hidden", c.topology.couplings.hidden_hidden);
    r.read("input_input", c.topology.couplings.input_input);
    r.read("output_output", c.topology.couplings.output_output);
    r.read("on_site", c.topology.couplings.on_site);
    r.finish();
  }
  if (const json* t = root.child("rates")) {
    ObjectReader r(*t, "rates");
    r.read("gamma_in", c.rates.gamma_in);
    r.read("gamma_out", c.rates.gamma_out);
    r.finish();
  }
  if (const json* t = root.child("fit")) {
    ObjectReader r(*t, "fit");
    r.read("clusters", c.fit.clusters);
    r.read("candidates", c.fit.candidates);
    r.read("max_iters", c.fit.max_iters);
    r.read("patience", c.fit.patience);
    r.read("h_max", c.fit.h_max);
    r.read("init_scale", c.fit.init_scale);
    std::string cost = cost_name(c.fit.cost);
    r.read("cost", cost);
    if (cost == "clustering") {
      c.fit.cost = CostKind::clustering;
    } else if (cost == "localization") {
      c.fit.cost = CostKind::localization;
    } else {
      throw ConfigError("fit.cost must be clustering or localization");
    }
    std::string mode = mode_name(c.fit.current_mode);
    r.read("current_mode", mode);
    if (mode == "raw") {
      c.fit.current_mode = CurrentMode::raw;
    } else if (mode == "normalized") {
      c.fit.current_mode = CurrentMode::normalized;
    } else {
      throw ConfigError("fit.current_mode must be raw or normalized");
    }
    r.read("t_lo", c.fit.t_lo);
    r.read("t_hi", c.fit.t_hi);
    r.read("seed", c.fit.seed);
    r.finish();
  }
  if (const json* t = root.child("kmeans")) {
    ObjectReader r(*t, "kmeans");
    c.kmeans.k = 0;
    r.read("k", c.kmeans.k);
    r.read("restarts", c.kmeans.restarts);
    r.read("max_iters", c.kmeans.max_iters);
    r.read("tol", c.kmeans.tol);
    r.read("seed", c.kmeans.seed);
    r.finish();
  } else {
    c.kmeans.k = 0;
  }
  if (const json* t = root.child("sweep")) {
    ObjectReader r(*t, "sweep");
    r.read("parameter", c.sweep.parameter);
    r.read("values", c.sweep.values);
    r.finish();
  }
  root.read("repeats", c.repeats);
  root.read("workers", c.workers);
  root.read("output_dir", c.output_dir);
  root.read("feature_space", c.feature_space);
  root.read("labels_path", c.labels_path);
  root.read("plot", c.plot);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto config = parse_config(j);
  // Data paths are relative to the config file.
  const std::filesystem::path data = config.dataset.path;
  if (!data.empty() && data.is_relative()) {
    config.dataset.path = (path.parent_path() / data).lexically_normal().string();
  }
  return config;
}

json to_json(const ExperimentConfig& c) {
  return json{
      {"schema_version", c.schema_version},
      {"dataset",
       {{"family", c.dataset.family},
        {"dim", c.dataset.dim},
        {"clusters", c.dataset.clusters},
        {"samples", c.dataset.samples},
        {"omega", c.dataset.omega},
        {"length", c.dataset.length},
        {"gap", c.dataset.gap},
        {"ipr_tol", c.dataset.ipr_tol},
        {"path", c.dataset.path},
        {"drop_features", c.dataset.drop_features},
        {"pad_len", c.dataset.pad_len},
        {"truth_property", c.dataset.truth_property},
        {"seed", c.dataset.seed}}},
      {"topology",
       {{"inputs", c.topology.inputs},
        {"hidden", c.topology.hidden},
        {"outputs", c.topology.outputs},
        {"hidden_hidden", c.topology.couplings.hidden_hidden},
        {"input_input", c.topology.couplings.input_input},
        {"output_output", c.topology.couplings.output_output},
        {"on_site", c.topology.couplings.on_site}}},
      {"rates", {{"gamma_in", c.rates.gamma_in}, {"gamma_out", c.rates.gamma_out}}},
      {"fit",
       {{"clusters", c.fit.clusters},
        {"candidates", c.fit.candidates},
        {"max_iters", c.fit.max_iters},
        {"patience", c.fit.patience},
        {"h_max", c.fit.h_max},
        {"init_scale", c.fit.init_scale},
        {"cost", cost_name(c.fit.cost)},
        {"current_mode", mode_name(c.fit.current_mode)},
        {"t_lo", c.fit.t_lo},
        {"t_hi", c.fit.t_hi},
        {"seed", c.fit.seed}}},
      {"kmeans",
       {{"k", c.kmeans.k},
        {"restarts", c.kmeans.restarts},
        {"max_iters", c.kmeans.max_iters},
        {"tol", c.kmeans.tol},
        {"seed", c.kmeans.seed}}},
      {"sweep", {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}}},
      {"repeats", c.repeats},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
      {"feature_space", c.feature_space},
      {"labels_path", c.labels_path},
      {"plot", c.plot}};
}

Dataset build_dataset(const DatasetSpec& spec) {
  Rng rng = make_stream(spec.seed, 0);
  Dataset ds;
  std::vector<std::string> warnings;
  if (spec.family == "sphere") {
    std::vector<Eigen::VectorXd> base;
    if (spec.dim == 2) {
      base = base_points_2d();
    } else if (spec.dim == 3) {
      base = base_points_3d();
    } else {
      for (int g = 0; g < spec.clusters; ++g) {
        base.push_back(Eigen::VectorXd::Unit(spec.dim, g));
      }
    }
    if (spec.clusters > static_cast<int>(base.size())) {
      throw ConfigError("not enough base points for " + std::to_string(spec.clusters) +
                        " clusters");
    }
    base.resize(static_cast<std::size_t>(spec.clusters));
    ds = gen_sphere_clusters(base, spec.samples, spec.omega, rng, &warnings);
  } else if (spec.family == "ipr") {
    ds = gen_ipr_dataset(spec.length, spec.samples, spec.gap, spec.ipr_tol, rng);
  } else if (spec.family == "iris") {
    ds = load_iris(spec.path,
                   std::set<std::string>(spec.drop_features.begin(), spec.drop_features.end()));
  } else if (spec.family == "xyz") {
    const auto records = load_xyz(spec.path);
    ds = molecules_to_dataset(records, spec.pad_len);
    if (!spec.truth_property.empty()) {
      const auto values = property_values(ds, spec.truth_property);
      if (values.empty()) {
        throw ConfigError("property " + spec.truth_property + " missing from some molecules");
      }
      ds.truth = binarize_property(values, &warnings);
    }
  } else if (spec.family == "csv") {
    ds = read_dataset_csv(spec.path);
  } else {
    throw ConfigError("unknown dataset family " + spec.family);
  }
  if (ds.size() == 0) throw DimensionError("dataset is empty");
  return ds;
}

NetworkTopology build_topology(const ExperimentConfig& config, const Dataset& data) {
  const int inputs = config.topology.inputs ? config.topology.inputs : data.dimension();
  if (inputs != data.dimension()) {
    throw ConfigError("topology.inputs (" + std::to_string(inputs) +
                      ") differs from the dataset dimension (" +
                      std::to_string(data.dimension()) + ")");
  }
  const int outputs = config.topology.outputs ? config.topology.outputs : config.fit.clusters;
  return NetworkTopology::layered(inputs, config.topology.hidden, outputs,
                                  config.topology.couplings);
}

std::vector<Eigen::VectorXd> feature_points(const Dataset& data, const std::string& space) {
  if (space == "normalized") return data.states;
  if (space == "raw") return data.raw_or_states();
  if (space != "standardized") throw ConfigError("unknown feature space " + space);
  auto pts = data.raw_or_states();
  if (pts.empty()) return pts;
  const auto d = pts.front().size();
  const double n = static_cast<double>(pts.size());
  for (Eigen::Index k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p(k);
    mean /= n;
    double var = 0.0;
    for (const auto& p : pts) var += (p(k) - mean) * (p(k) - mean);
    const double sd = std::sqrt(var / n);
    for (auto& p : pts) p(k) = sd > 0.0 ? (p(k) - mean) / sd : 0.0;
  }
  return pts;
}

std::uint64_t run_seed(std::uint64_t base, int r) {
  return base + static_cast<std::uint64_t>(r);
}

ProtocolResult run_protocol(const ExperimentConfig& config, const Dataset& data) {
  const auto topo = build_topology(config, data);
  const auto states = data.input_states();
  ProtocolResult out;
  out.fits.resize(static_cast<std::size_t>(config.repeats));
  const int outer = std::min(config.workers, config.repeats);
  const int inner = std::max(1, config.workers / std::max(1, outer));
  parallel_for(out.fits.size(), outer, [&](std::size_t r) {
    FitConfig fit = config.fit;
    fit.seed = run_seed(config.fit.seed, static_cast<int>(r));
    fit.workers = inner;
    out.fits[r] = qluster_fit(states, topo, config.rates, fit);
  });
  for (const auto& f : out.fits) out.runs.emplace_back(f.labels);
  if (out.runs.size() >= 2) {
    out.report = consensus_report(out.runs, data.truth, config.fit.clusters);
  } else {
    out.report.labels = out.runs.front();
    out.report.matrix = consensus_matrix(out.runs);
    out.report.stability = 1.0;
    if (data.truth) {
      const double ri = rand_index(*data.truth, out.runs.front());
      const double ari = adjusted_rand_index(*data.truth, out.runs.front());
      out.report.run_ri = {ri};
      out.report.run_ari = {ari};
      out.report.mean_ri = out.report.consensus_ri = ri;
      out.report.mean_ari = out.report.consensus_ari = ari;
    }
  }
  return out;
}

json cmd_generate(const ExperimentConfig& config) {
  const auto data = build_dataset(config.dataset);
  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);
  write_dataset_csv(dir / "dataset.csv", data);
  json m = envelope(config, "generate");
  m["samples"] = data.size();
  m["dimension"] = data.dimension();
  m["classes"] = data.truth ? json(data.truth->cluster_count()) : json(nullptr);
  m["files"] = {"dataset.csv"};
  write_json(dir / "manifest.json", m);
  return m;
}

json cmd_fit(const ExperimentConfig& config) {
  const auto data = build_dataset(config.dataset);
  const auto topo = build_topology(config, data);
  FitConfig fit = config.fit;
  fit.workers = config.workers;
  const auto result = qluster_fit(data.input_states(), topo, config.rates, fit);
  const Partition labels(result.labels);

  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);
  write_labels_csv(dir / "labels.csv", labels, data.truth, &result.currents);
  std::vector<std::vector<std::string>> trace{{"iteration", "cost"}};
  for (std::size_t k = 0; k < result.cost_trace.size(); ++k) {
    trace.push_back({std::to_string(k), fmt(result.cost_trace[k])});
  }
  csv::write_file(dir / "cost_trace.csv", trace);
  write_matrix_csv(dir / "hamiltonian.csv", result.hamiltonian.couplings, node_names(topo));

  const auto points = feature_points(data, config.feature_space);
  json m = envelope(config, "fit");
  m["seeds"] = {fit.seed};
  m["runs"] = json::array({{{"seed", fit.seed},
                            {"iterations", result.iterations_run},
                            {"final_cost", result.cost_trace.back()},
                            {"scores", score_partition(labels, data.truth, points)}}});
  m["aggregate"] = m["runs"][0]["scores"];
  m["warnings"] = result.warnings;
  json files = {"labels.csv", "cost_trace.csv", "hamiltonian.csv"};
  if (config.plot) {
    svg::write(dir / "cost_trace.svg",
               svg::line_plot(result.cost_trace, "cost trace", "iteration", "cost"));
    files.push_back("cost_trace.svg");
  }
  m["files"] = files;
  write_json(dir / "manifest.json", m);
  return m;
}

json cmd_consensus(const ExperimentConfig& config) {
  const auto data = build_dataset(config.dataset);
  const auto protocol = run_protocol(config, data);
  const auto& report = protocol.report;
  const auto points = feature_points(data, config.feature_space);

  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);

  std::vector<std::vector<std::string>> runs_csv;
  std::vector<std::string> header{"id"};
  for (std::size_t r = 0; r < protocol.runs.size(); ++r) header.push_back("run" + std::to_string(r));
  runs_csv.push_back(std::move(header));
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (const auto& run : protocol.runs) row.push_back(std::to_string(run[i]));
    runs_csv.push_back(std::move(row));
  }
  csv::write_file(dir / "runs.csv", runs_csv);

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < data.size(); ++i) ids.push_back(std::to_string(i));
  write_matrix_csv(dir / "consensus_matrix.csv", report.matrix, ids);
  write_labels_csv(dir / "consensus_labels.csv", report.labels, data.truth, nullptr);

  json m = envelope(config, "consensus");
  json seeds = json::array();
  json runs = json::array();
  std::vector<json> run_scores;
  for (std::size_t r = 0; r < protocol.fits.size(); ++r) {
    const auto& f = protocol.fits[r];
    const auto seed = run_seed(config.fit.seed, static_cast<int>(r));
    seeds.push_back(seed);
    run_scores.push_back(score_partition(protocol.runs[r], data.truth, points));
    runs.push_back({{"seed", seed},
                    {"iterations", f.iterations_run},
                    {"final_cost", f.cost_trace.back()},
                    {"scores", run_scores.back()}});
  }
  m["seeds"] = seeds;
  m["runs"] = runs;
  m["aggregate"] = {{"mean", mean_scores(run_scores)},
                    {"mean_ri", opt(report.mean_ri)},
                    {"mean_ari", opt(report.mean_ari)},
                    {"consensus_ri", opt(report.consensus_ri)},
                    {"consensus_ari", opt(report.consensus_ari)},
                    {"stability", report.stability},
                    {"consensus", score_partition(report.labels, data.truth, points)}};
  json files = {"runs.csv", "consensus_matrix.csv", "consensus_labels.csv"};

  if (config.dataset.family == "xyz") {
    std::vector<std::vector<std::string>> prop_rows{
        {"property", "consensus_ri", "consensus_ari", "mean_ri", "mean_ari"}};
    json props = json::array();
    for (const auto& key : common_properties(data)) {
      const auto values = property_values(data, key);
      const Partition truth = binarize_property(values);
      double mri = 0.0;
      double mari = 0.0;
      for (const auto& run : protocol.runs) {
        mri += rand_index(truth, run);
        mari += adjusted_rand_index(truth, run);
      }
      mri /= static_cast<double>(protocol.runs.size());
      mari /= static_cast<double>(protocol.runs.size());
      const double cri = rand_index(truth, report.labels);
      const double cari = adjusted_rand_index(truth, report.labels);
      prop_rows.push_back({key, fmt(cri), fmt(cari), fmt(mri), fmt(mari)});
      props.push_back({{"property", key},
                       {"consensus_ri", cri},
                       {"consensus_ari", cari},
                       {"mean_ri", mri},
                       {"mean_ari", mari}});
    }
    csv::write_file(dir / "property_scores.csv", prop_rows);
    m["property_scores"] = props;
    files.push_back("property_scores.csv");
  }

  if (config.plot) {
    svg::write(dir / "consensus.svg", svg::heatmap(report.matrix, "consensus matrix"));
    std::vector<double> ri(report.run_ri.begin(), report.run_ri.end());
    if (!ri.empty()) {
      svg::write(dir / "run_ri.svg", svg::line_plot(ri, "RI per run", "run", "RI"));
      files.push_back("run_ri.svg");
    }
    files.push_back("consensus.svg");
  }
  std::vector<std::string> warnings;
  for (const auto& f : protocol.fits) {
    warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  m["warnings"] = warnings;
  m["files"] = files;
  write_json(dir / "report.json", m);
  return m;
}

ExperimentConfig with_sweep_value(const ExperimentConfig& config, double v) {
  ExperimentConfig c = config;
  const auto& p = config.sweep.parameter;
  if (p == "omega") {
    c.dataset.omega = v;
  } else if (p == "gap") {
    c.dataset.gap = v;
  } else if (p == "hidden") {
    if (v < 0 || v != std::floor(v)) throw ConfigError("hidden sweep values must be integers");
    c.topology.hidden = static_cast<int>(v);
  } else if (p == "gamma_in") {
    c.rates.gamma_in = v;
  } else {
    c.rates.gamma_out = v;
  }
  c.validate();
  return c;
}

json cmd_sweep(const ExperimentConfig& config) {
  if (config.sweep.values.empty()) throw ConfigError("sweep.values is empty");
  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);

  std::vector<std::vector<std::string>> rows{
      {config.sweep.parameter, "mean_ri", "mean_ari", "consensus_ri", "consensus_ari", "stability"}};
  json points = json::array();
  std::vector<double> consensus_ari;
  for (double v : config.sweep.values) {
    const ExperimentConfig c = with_sweep_value(config, v);
    const auto data = build_dataset(c.dataset);
    const auto protocol = run_protocol(c, data);
    const auto& rep = protocol.report;
    auto num = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
    rows.push_back({fmt(v), num(rep.mean_ri), num(rep.mean_ari), num(rep.consensus_ri),
                    num(rep.consensus_ari), fmt(rep.stability)});
    points.push_back({{"value", v},
                      {"mean_ri", opt(rep.mean_ri)},
                      {"mean_ari", opt(rep.mean_ari)},
                      {"consensus_ri", opt(rep.consensus_ri)},
                      {"consensus_ari", opt(rep.consensus_ari)},
                      {"stability", rep.stability}});
    consensus_ari.push_back(rep.consensus_ari.value_or(std::nan("")));
  }
  csv::write_file(dir / "sweep.csv", rows);

  json m = envelope(config, "sweep");
  json seeds = json::array();
  for (int r = 0; r < config.repeats; ++r) seeds.push_back(run_seed(config.fit.seed, r));
  m["seeds"] = seeds;
  m["aggregate"] = {{"parameter", config.sweep.parameter}, {"points", points}};
  json files = {"sweep.csv"};
  if (config.plot) {
    svg::write(dir / "sweep.svg", svg::line_plot(consensus_ari, "consensus ARI",
                                                 config.sweep.parameter, "ARI"));
    files.push_back("sweep.svg");
  }
  m["files"] = files;
  write_json(dir / "manifest.json", m);
  return m;
}

json cmd_baseline(const ExperimentConfig& config) {
  const auto data = build_dataset(config.dataset);
  const auto points = feature_points(data, config.feature_space);
  KMeansConfig km = config.kmeans;
  if (km.k == 0) km.k = config.fit.clusters;
  km.workers = config.workers;

  std::vector<Partition> runs;
  std::vector<json> scores;
  json seeds = json::array();
  for (int r = 0; r < config.repeats; ++r) {
    KMeansConfig run = km;
    run.seed = run_seed(km.seed, r);
    seeds.push_back(run.seed);
    const auto result = kmeans(points, run);
    runs.push_back(result.labels);
    scores.push_back(score_partition(result.labels, data.truth, points));
  }
  const double stab = runs.size() >= 2 ? stability(runs) : 1.0;
  json agg = scores.front();
  agg["stability"] = stab;

  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);
  auto cell = [](const json& v) { return v.is_number() ? fmt(v.get<double>()) : std::string(); };
  csv::write_file(dir / "baseline.csv",
                  {{"feature_space", "ri", "ari", "cp", "dvi", "silhouette", "stability"},
                   {config.feature_space, cell(agg["ri"]), cell(agg["ari"]), cell(agg["cp"]),
                    cell(agg["dvi"]), cell(agg["silhouette"]), fmt(stab)}});
  write_labels_csv(dir / "labels.csv", runs.front(), data.truth, nullptr);

  json m = envelope(config, "baseline");
  m["seeds"] = seeds;
  json runs_json = json::array();
  for (std::size_t r = 0; r < scores.size(); ++r) {
    runs_json.push_back({{"seed", seeds[r]}, {"scores", scores[r]}});
  }
  m["runs"] = runs_json;
  m["aggregate"] = agg;
  m["files"] = {"baseline.csv", "labels.csv"};
  write_json(dir / "report.json", m);
  return m;
}

json cmd_metrics(const ExperimentConfig& config) {
  if (config.labels_path.empty()) throw ConfigError("labels_path is required for metrics");
  const auto data = build_dataset(config.dataset);
  const auto rows = csv::read_file(config.labels_path);
  if (rows.empty()) throw ParseError(config.labels_path + ": empty file");
  const auto& header = rows.front();
  const auto col = std::find(header.begin(), header.end(), "label") - header.begin();
  if (col == static_cast<std::ptrdiff_t>(header.size())) {
    throw ParseError(config.labels_path + ":1: no 'label' column");
  }
  std::vector<int> labels;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double v = 0.0;
    if (static_cast<std::size_t>(col) >= rows[i].size() ||
        !csv::parse_double(rows[i][static_cast<std::size_t>(col)], v) || v < 0 ||
        v != std::floor(v)) {
      throw ParseError(config.labels_path + ":" + std::to_string(i + 1) + ": bad label");
    }
    labels.push_back(static_cast<int>(v));
  }
  if (labels.size() != data.size()) {
    throw DimensionError("labels file has " + std::to_string(labels.size()) +
                         " rows but the dataset has " + std::to_string(data.size()));
  }
  const auto points = feature_points(data, config.feature_space);
  const auto scores = score_partition(Partition(labels), data.truth, points);

  const std::filesystem::path dir = config.output_dir;
  ensure_dir(dir);
  auto cell = [](const json& v) { return v.is_number() ? fmt(v.get<double>()) : std::string(); };
  csv::write_file(dir / "metrics.csv",
                  {{"ri", "ari", "cp", "dvi", "silhouette", "clusters_used"},
                   {cell(scores["ri"]), cell(scores["ari"]), cell(scores["cp"]),
                    cell(scores["dvi"]), cell(scores["silhouette"]),
                    std::to_string(scores["clusters_used"].get<int>())}});
  json m = envelope(config, "metrics");
  m["seeds"] = json::array();
  m["aggregate"] = scores;
  m["files"] = {"metrics.csv"};
  write_json(dir / "report.json", m);
  return m;
}

}  // namespace qlustering::experiment
