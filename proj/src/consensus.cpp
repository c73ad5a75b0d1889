#include "qlustering/consensus.hpp"

#include <limits>

#include "qlustering/metrics.hpp"

namespace qlustering {

Eigen::MatrixXd consensus_matrix(std::span<const Partition> runs) {
  if (runs.empty()) throw DimensionError("consensus_matrix needs at least one run");
  const auto n = static_cast<Eigen::Index>(runs.front().size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (const auto& run : runs) {
    require_same_length(runs.front(), run, "consensus_matrix");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (run[static_cast<std::size_t>(i)] == run[static_cast<std::size_t>(j)]) c(i, j) += 1.0;
      }
    }
  }
  return c / static_cast<double>(runs.size());
}

std::vector<Merge> upgma(const Eigen::MatrixXd& distance, int clusters) {
  const auto n = static_cast<int>(distance.rows());
  if (distance.cols() != n) throw DimensionError("distance matrix must be square");
  if (clusters < 1 || clusters > n) {
    throw DimensionError("cluster count " + std::to_string(clusters) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  Eigen::MatrixXd d = distance;
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<Merge> merges;
  for (int remaining = n; remaining > clusters; --remaining) {
    int best_a = -1;
    int best_b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!active[static_cast<std::size_t>(a)]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!active[static_cast<std::size_t>(b)]) continue;
        if (d(a, b) < best) {
          best = d(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    const double sa = size[static_cast<std::size_t>(best_a)];
    const double sb = size[static_cast<std::size_t>(best_b)];
    for (int k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == best_a || k == best_b) continue;
      const double merged = (sa * d(best_a, k) + sb * d(best_b, k)) / (sa + sb);
      d(best_a, k) = d(k, best_a) = merged;
    }
    size[static_cast<std::size_t>(best_a)] += size[static_cast<std::size_t>(best_b)];
    active[static_cast<std::size_t>(best_b)] = 0;
    merges.push_back({best_a, best_b, best});
  }
  return merges;
}

Partition consensus_cluster(const Eigen::MatrixXd& consensus, int q) {
  const auto n = static_cast<int>(consensus.rows());
  if (q > n) throw DimensionError("q exceeds the number of samples");
  const auto merges = upgma(Eigen::MatrixXd::Ones(n, n) - consensus, q);

  std::vector<int> root(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = i;
  for (const auto& m : merges) {
    for (auto& r : root) {
      if (r == m.right) r = m.left;
    }
  }
  std::vector<int> id_of(static_cast<std::size_t>(n), -1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  int next = 0;
  for (int i = 0; i < n; ++i) {
    auto& id = id_of[static_cast<std::size_t>(root[static_cast<std::size_t>(i)])];
    if (id < 0) id = next++;
    labels[static_cast<std::size_t>(i)] = id;
  }
  return Partition(std::move(labels));
}

ConsensusReport consensus_report(std::span<const Partition> runs,
                                 const std::optional<Partition>& truth, int q) {
  if (runs.size() < 2) throw DimensionError("consensus_report needs at least 2 runs");
  ConsensusReport report;
  report.matrix = consensus_matrix(runs);
  report.labels = consensus_cluster(report.matrix, q);
  report.stability = stability(runs);
  if (truth) {
    double ri = 0.0;
    double ari = 0.0;
    for (const auto& run : runs) {
      report.run_ri.push_back(rand_index(*truth, run));
      report.run_ari.push_back(adjusted_rand_index(*truth, run));
      ri += report.run_ri.back();
      ari += report.run_ari.back();
    }
    report.mean_ri = ri / static_cast<double>(runs.size());
    report.mean_ari = ari / static_cast<double>(runs.size());
    report.consensus_ri = rand_index(*truth, report.labels);
    report.consensus_ari = adjusted_rand_index(*truth, report.labels);
  }
  return report;
}

}  // namespace qlustering
