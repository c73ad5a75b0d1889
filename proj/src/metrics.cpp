#include "qlustering/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace qlustering {
namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

void require_points(std::span<const Eigen::VectorXd> points, const Partition& labels,
                    const char* what) {
  if (points.size() != labels.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(points.size()) +
                         " points but " + std::to_string(labels.size()) + " labels");
  }
  for (const auto& p : points) {
    if (p.size() != points.front().size()) {
      throw DimensionError(std::string(what) + ": points have mixed dimensions");
    }
  }
}

// Members of each used cluster id, in id order.
std::vector<std::vector<std::size_t>> members(const Partition& labels) {
  std::map<int, std::vector<std::size_t>> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) by_id[labels[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(by_id.size());
  for (auto& [id, m] : by_id) out.push_back(std::move(m));
  return out;
}

Eigen::MatrixXd distance_matrix(std::span<const Eigen::VectorXd> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points[i] - points[j]).norm();
    }
  }
  return d;
}

struct PairCounts {
  std::int64_t total;
  std::int64_t both;    // sum_ij C(n_ij, 2)
  std::int64_t in_a;    // sum_i C(a_i, 2)
  std::int64_t in_b;    // sum_j C(b_j, 2)
};

PairCounts pair_counts(const Partition& a, const Partition& b, const char* what) {
  require_same_length(a, b, what);
  if (a.size() < 2) throw DimensionError(std::string(what) + " needs at least 2 samples");
  const auto table = ContingencyTable::build(a, b);
  PairCounts pc{pairs(static_cast<std::int64_t>(a.size())), 0, 0, 0};
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.counts.cols(); ++j) pc.both += pairs(table.counts(i, j));
  }
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) pc.in_a += pairs(table.counts.row(i).sum());
  for (Eigen::Index j = 0; j < table.counts.cols(); ++j) pc.in_b += pairs(table.counts.col(j).sum());
  return pc;
}

}  // namespace

ContingencyTable ContingencyTable::build(const Partition& a, const Partition& b) {
  require_same_length(a, b, "contingency table");
  ContingencyTable t;
  t.counts.setZero(a.id_bound(), b.id_bound());
  for (std::size_t n = 0; n < a.size(); ++n) ++t.counts(a[n], b[n]);
  return t;
}

double rand_index(const Partition& a, const Partition& b) {
  const PairCounts pc = pair_counts(a, b, "rand_index");
  // TP + TN = total - (in_a - both) - (in_b - both)
  const std::int64_t agree = pc.total + 2 * pc.both - pc.in_a - pc.in_b;
  return static_cast<double>(agree) / static_cast<double>(pc.total);
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  const PairCounts pc = pair_counts(a, b, "adjusted_rand_index");
  const double expected =
      static_cast<double>(pc.in_a) * static_cast<double>(pc.in_b) / static_cast<double>(pc.total);
  const double maximum = 0.5 * static_cast<double>(pc.in_a + pc.in_b);
  const double denom = maximum - expected;
  if (denom == 0.0) {
    return (pc.both == pc.in_a && pc.both == pc.in_b) ? 1.0 : 0.0;
  }
  return (static_cast<double>(pc.both) - expected) / denom;
}

double compactness(std::span<const Eigen::VectorXd> points, const Partition& labels) {
  require_points(points, labels, "compactness");
  double total = 0.0;
  for (const auto& m : members(labels)) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(points[m.front()].size());
    for (auto i : m) centroid += points[i];
    centroid /= static_cast<double>(m.size());
    for (auto i : m) total += (points[i] - centroid).squaredNorm();
  }
  return total;
}

double dunn_index(std::span<const Eigen::VectorXd> points, const Partition& labels) {
  require_points(points, labels, "dunn_index");
  const auto clusters = members(labels);
  if (clusters.size() < 2) throw DimensionError("dunn_index needs at least 2 clusters");
  const Eigen::MatrixXd d = distance_matrix(points);

  double diameter = 0.0;
  for (const auto& m : clusters) {
    for (auto i : m) {
      for (auto j : m) diameter = std::max(diameter, d(i, j));
    }
  }
  if (diameter == 0.0) {
    throw DimensionError("dunn_index undefined: every cluster has zero diameter");
  }
  double separation = std::numeric_limits<double>::infinity();
  for (std::size_t c1 = 0; c1 < clusters.size(); ++c1) {
    for (std::size_t c2 = c1 + 1; c2 < clusters.size(); ++c2) {
      for (auto i : clusters[c1]) {
        for (auto j : clusters[c2]) separation = std::min(separation, d(i, j));
      }
    }
  }
  return separation / diameter;
}

double silhouette(std::span<const Eigen::VectorXd> points, const Partition& labels) {
  require_points(points, labels, "silhouette");
  const auto clusters = members(labels);
  if (clusters.size() < 2) throw DimensionError("silhouette needs at least 2 clusters");
  const Eigen::MatrixXd d = distance_matrix(points);

  std::vector<std::size_t> cluster_of(points.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto i : clusters[c]) cluster_of[i] = c;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& own = clusters[cluster_of[i]];
    if (own.size() == 1) continue;
    double a = 0.0;
    for (auto j : own) a += d(i, j);
    a /= static_cast<double>(own.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (c == cluster_of[i]) continue;
      double mean = 0.0;
      for (auto j : clusters[c]) mean += d(i, j);
      b = std::min(b, mean / static_cast<double>(clusters[c].size()));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(points.size());
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  // Shortest augmenting path with row/column potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("assignment cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match_col[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int row0 = match_col[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match_col[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match_col[col0] != 0);
    do {
      const int col1 = way[col0];
      match_col[col0] = match_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> result(n, -1);
  for (int col = 1; col <= n; ++col) result[match_col[col] - 1] = col - 1;
  return result;
}

Alignment hungarian_align(const Partition& a, const Partition& b) {
  require_same_length(a, b, "hungarian_align");
  const auto table = ContingencyTable::build(a, b);
  const auto k = std::max(table.counts.rows(), table.counts.cols());
  // Rows are b ids, columns a ids; maximize matched counts.
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.counts.cols(); ++j) {
      cost(j, i) = -static_cast<double>(table.counts(i, j));
    }
  }
  Alignment out;
  out.mapping = solve_assignment(cost);
  std::int64_t matched = 0;
  for (Eigen::Index bid = 0; bid < table.counts.cols(); ++bid) {
    const int aid = out.mapping[static_cast<std::size_t>(bid)];
    if (aid < table.counts.rows()) matched += table.counts(aid, bid);
  }
  out.match_fraction =
      a.size() == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(a.size());
  return out;
}

double stability(std::span<const Partition> runs) {
  if (runs.size() < 2) throw DimensionError("stability needs at least 2 runs");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      total += hungarian_align(runs[i], runs[j]).match_fraction;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace qlustering
