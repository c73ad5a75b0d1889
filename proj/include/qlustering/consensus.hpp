#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qlustering/partition.hpp"

namespace qlustering {

/// C(i, j) = fraction of runs placing samples i and j in the same cluster.
Eigen::MatrixXd consensus_matrix(std::span<const Partition> runs);

struct Merge {
  int left;   // surviving cluster slot (smallest member index)
  int right;  // absorbed slot
  double distance;
};

/// Average-linkage (UPGMA) agglomeration of a symmetric distance matrix down
/// to `clusters` groups. At equal distance the pair with the lowest
/// (left, right) slot indices merges first.
std::vector<Merge> upgma(const Eigen::MatrixXd& distance, int clusters);

/// UPGMA on 1 - C cut at q clusters; ids numbered by first appearance.
Partition consensus_cluster(const Eigen::MatrixXd& consensus, int q);

struct ConsensusReport {
  Eigen::MatrixXd matrix;
  Partition labels;
  double stability = 0.0;
  std::optional<double> mean_ri;
  std::optional<double> mean_ari;
  std::optional<double> consensus_ri;
  std::optional<double> consensus_ari;
  std::vector<double> run_ri;
  std::vector<double> run_ari;
};

ConsensusReport consensus_report(std::span<const Partition> runs,
                                 const std::optional<Partition>& truth, int q);

}  // namespace qlustering
