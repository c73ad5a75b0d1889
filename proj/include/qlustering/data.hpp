#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qlustering/partition.hpp"
#include "qlustering/random.hpp"
#include "qlustering/transport.hpp"

namespace qlustering {

struct Dataset {
  /// Unit-norm states fed to the network.
  std::vector<Eigen::VectorXd> states;
  /// Pre-normalization features; empty when the family is generated directly
  /// on the sphere.
  std::vector<Eigen::VectorXd> features;
  std::vector<std::string> feature_names;
  std::optional<Partition> truth;
  std::vector<std::map<std::string, std::string>> meta;

  std::size_t size() const { return states.size(); }
  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

  std::vector<InputState> input_states() const;
  /// `features` when present, otherwise `states`.
  const std::vector<Eigen::VectorXd>& raw_or_states() const {
    return features.empty() ? states : features;
  }
};

/// v / |v|_2; throws DimensionError for |v| <= 1e-12.
Eigen::VectorXd normalize_to_state(const Eigen::VectorXd& v);

// --- synthetic position clusters -------------------------------------------

std::vector<Eigen::VectorXd> base_points_2d();
std::vector<Eigen::VectorXd> base_points_3d();  // five centers; q < 5 takes a prefix

/// Psi_n = normalize((1 - omega) b_g + omega u_n), u_n uniform on the unit
/// sphere; groups are contiguous blocks of N/q (remainder dealt round-robin).
Dataset gen_sphere_clusters(std::span<const Eigen::VectorXd> base_points, int n,
                            double omega, Rng& rng,
                            std::vector<std::string>* warnings = nullptr);

// --- localization -----------------------------------------------------------

/// (sum_i psi_i^4)^-1.
double ipr(const Eigen::VectorXd& psi);

/// Random-sign, randomly permuted exponential envelope with |ipr - target| <= tol.
Eigen::VectorXd gen_ipr_state(int length, double ipr_target, double tol, Rng& rng);

struct IprBands {
  double low_lo, low_hi;    // class 0 (localized) targets
  double high_lo, high_hi;  // class 1 (extended) targets
};

/// Equal-width class bands on [1, L] separated by `gap` = high_lo - low_hi.
IprBands ipr_bands(int length, double gap);

/// n/2 samples per class with targets uniform in each band; truth = class.
Dataset gen_ipr_dataset(int length, int n, double gap, double tol, Rng& rng);

// --- molecules --------------------------------------------------------------

struct Atom {
  int z = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct MoleculeRecord {
  std::string name;
  std::vector<Atom> atoms;
  std::vector<std::pair<std::string, double>> properties;

  std::optional<double> property(const std::string& key) const;
};

int atomic_number(const std::string& symbol);
std::string element_symbol(int z);

/// Sorted heavy-atom pair distances, zero-padded to `pad_len`, unit-normalized.
Eigen::VectorXd sid_fingerprint(const MoleculeRecord& mol, int pad_len = 10);

/// Unnormalized sorted distances (padded), i.e. the fingerprint before scaling.
Eigen::VectorXd sid_distances(const MoleculeRecord& mol, int pad_len = 10);

/// Reads one multi-frame extended-XYZ file, or every *.xyz file in a directory
/// (sorted by name). Comment line: whitespace-separated key=value tokens;
/// `name=` sets the record name, numeric values become properties.
std::vector<MoleculeRecord> load_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, std::span<const MoleculeRecord> records);

Dataset molecules_to_dataset(std::span<const MoleculeRecord> records, int pad_len = 10);

/// Class 1 iff value > median; ties at the median go to class 0.
Partition binarize_property(std::span<const double> values,
                            std::vector<std::string>* warnings = nullptr);

// --- iris -------------------------------------------------------------------

/// CSV with header; four numeric feature columns then a species column.
Dataset load_iris(const std::filesystem::path& path,
                  const std::set<std::string>& drop_features = {});

// --- CSV export -------------------------------------------------------------

/// Header: id,x0..x{L-1},truth (truth column empty when absent).
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace qlustering
