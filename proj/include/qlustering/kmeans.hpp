#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "qlustering/partition.hpp"

namespace qlustering {

/// Lloyd iterations are O(n k d) each; `restarts` independent k-means++
/// seedings are run and the lowest within-cluster sum of squares is kept.
struct KMeansConfig {
  int k = 2;
  int restarts = 10;
  int max_iters = 300;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct KMeansResult {
  Partition labels;
  std::vector<Eigen::VectorXd> centroids;
  /// Equals compactness(points, labels).
  double compactness = 0.0;
  int best_restart = 0;
  /// Compactness after each Lloyd iteration of the winning restart.
  std::vector<double> history;
};

KMeansResult kmeans(std::span<const Eigen::VectorXd> points, const KMeansConfig& config);

}  // namespace qlustering
