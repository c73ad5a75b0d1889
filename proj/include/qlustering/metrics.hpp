#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qlustering/partition.hpp"

namespace qlustering {

/// counts(i, j) = number of samples with a-id i and b-id j.
struct ContingencyTable {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  static ContingencyTable build(const Partition& a, const Partition& b);
  std::int64_t total() const { return counts.sum(); }
};

double rand_index(const Partition& a, const Partition& b);

/// Permutation-model ARI. When the denominator vanishes (e.g. both partitions
/// trivial) returns 1 if the two partitions induce the same co-membership
/// pairs, else 0.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Within-cluster sum of squared distances to the cluster means.
double compactness(std::span<const Eigen::VectorXd> points, const Partition& labels);

double dunn_index(std::span<const Eigen::VectorXd> points, const Partition& labels);

/// Mean silhouette; points in single-member clusters score 0.
double silhouette(std::span<const Eigen::VectorXd> points, const Partition& labels);

/// Minimum-cost perfect matching on a square matrix; result[row] = column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct Alignment {
  /// mapping[b_id] = a_id that b_id is matched to (ids padded to a common size).
  std::vector<int> mapping;
  double match_fraction = 0.0;
};

/// Relabels b to agree with a as much as possible.
Alignment hungarian_align(const Partition& a, const Partition& b);

/// Mean aligned match fraction over all unordered pairs of runs.
double stability(std::span<const Partition> runs);

}  // namespace qlustering
