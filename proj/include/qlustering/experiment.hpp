#pragma once

// Config-driven experiment runner shared by the command-line tool and the
// Python module. Every command writes its artifacts into `output_dir` and
// returns the JSON manifest it also writes there.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlustering/consensus.hpp"
#include "qlustering/data.hpp"
#include "qlustering/engine.hpp"
#include "qlustering/kmeans.hpp"
#include "qlustering/transport.hpp"

namespace qlustering::experiment {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

struct DatasetSpec {
  std::string family = "sphere";  // sphere | ipr | iris | xyz | csv
  int dim = 3;
  int clusters = 4;
  int samples = 60;
  double omega = 0.15;
  int length = 10;
  double gap = 5.0;
  double ipr_tol = 0.05;
  std::string path;
  std::vector<std::string> drop_features;
  int pad_len = 10;
  std::string truth_property;
  std::uint64_t seed = 42;
};

struct TopologySpec {
  int inputs = 0;   // 0: dataset dimension
  int hidden = 2;
  int outputs = 0;  // 0: fit.clusters
  LayerCouplings couplings;
};

struct SweepSpec {
  std::string parameter = "omega";  // omega | gap | hidden | gamma_in | gamma_out
  std::vector<double> values;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  DatasetSpec dataset;
  TopologySpec topology;
  DissipationRates rates;
  FitConfig fit;
  KMeansConfig kmeans;
  SweepSpec sweep;
  int repeats = 10;
  int workers = 1;
  std::string output_dir = "out";
  std::string feature_space = "normalized";  // normalized | raw | standardized
  std::string labels_path;                    // metrics command input
  bool plot = false;

  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Also resolves a relative dataset.path against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully materialized config, every default spelled out.
nlohmann::json to_json(const ExperimentConfig& config);

Dataset build_dataset(const DatasetSpec& spec);
NetworkTopology build_topology(const ExperimentConfig& config, const Dataset& data);

/// Points used for internal metrics and k-means in the configured space.
std::vector<Eigen::VectorXd> feature_points(const Dataset& data, const std::string& space);

/// Seed of repeat r.
std::uint64_t run_seed(std::uint64_t base, int r);

struct ProtocolResult {
  std::vector<FitResult> fits;
  std::vector<Partition> runs;
  ConsensusReport report;
};

/// Copy of `config` with the sweep parameter set to `v`.
ExperimentConfig with_sweep_value(const ExperimentConfig& config, double v);

/// R independent fits followed by consensus clustering.
ProtocolResult run_protocol(const ExperimentConfig& config, const Dataset& data);

nlohmann::json cmd_generate(const ExperimentConfig& config);
nlohmann::json cmd_fit(const ExperimentConfig& config);
nlohmann::json cmd_consensus(const ExperimentConfig& config);
nlohmann::json cmd_sweep(const ExperimentConfig& config);
nlohmann::json cmd_baseline(const ExperimentConfig& config);
nlohmann::json cmd_metrics(const ExperimentConfig& config);

}  // namespace qlustering::experiment
