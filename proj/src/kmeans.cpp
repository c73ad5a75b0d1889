#include "qlustering/kmeans.hpp"

#include <limits>

#include "qlustering/metrics.hpp"
#include "qlustering/parallel.hpp"
#include "qlustering/random.hpp"

namespace qlustering {
namespace {

struct RestartOutcome {
  std::vector<int> labels;
  std::vector<Eigen::VectorXd> centroids;
  std::vector<double> history;
  double sse = std::numeric_limits<double>::infinity();
};

std::vector<Eigen::VectorXd> seed_plus_plus(std::span<const Eigen::VectorXd> points, int k,
                                            Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Eigen::VectorXd> centroids;
  centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points[i] - centroids.back()).squaredNorm());
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> draw(d2.begin(), d2.end());
      pick = draw(rng);
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

int nearest(const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& centroids) {
  int best = 0;
  double best_d = (p - centroids[0]).squaredNorm();
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = (p - centroids[static_cast<std::size_t>(c)]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

RestartOutcome run_restart(std::span<const Eigen::VectorXd> points, const KMeansConfig& cfg,
                           Rng& rng) {
  const std::size_t n = points.size();
  const auto k = static_cast<std::size_t>(cfg.k);
  RestartOutcome out;
  out.centroids = seed_plus_plus(points, cfg.k, rng);
  out.labels.assign(n, 0);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(points[i], out.centroids);
      if (c != out.labels[i]) changed = true;
      out.labels[i] = c;
    }

    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(points[0].size()));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(out.labels[i])] += points[i];
      ++counts[static_cast<std::size_t>(out.labels[i])];
    }
    // Empty clusters take the point farthest from its current centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto owner = static_cast<std::size_t>(out.labels[i]);
        if (counts[owner] <= 1) continue;
        const double d = (points[i] - sums[owner] / static_cast<double>(counts[owner])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      const auto owner = static_cast<std::size_t>(out.labels[far]);
      sums[owner] -= points[far];
      --counts[owner];
      sums[c] = points[far];
      counts[c] = 1;
      out.labels[far] = static_cast<int>(c);
      changed = true;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const Eigen::VectorXd next = sums[c] / static_cast<double>(counts[c]);
      shift = std::max(shift, (next - out.centroids[c]).norm());
      out.centroids[c] = next;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sse += (points[i] - out.centroids[static_cast<std::size_t>(out.labels[i])]).squaredNorm();
    }
    out.history.push_back(sse);
    out.sse = sse;
    if (!changed || shift <= cfg.tol) break;
  }
  return out;
}

}  // namespace

void KMeansConfig::validate() const {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");
  if (max_iters < 1) throw ConfigError("kmeans: max_iters must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("kmeans: tol must be >= 0");
  if (workers < 1) throw ConfigError("kmeans: workers must be >= 1");
}

KMeansResult kmeans(std::span<const Eigen::VectorXd> points, const KMeansConfig& config) {
  config.validate();
  if (points.empty()) throw DimensionError("kmeans: empty dataset");
  if (static_cast<int>(points.size()) < config.k) {
    throw DimensionError("kmeans: fewer points (" + std::to_string(points.size()) +
                         ") than clusters (" + std::to_string(config.k) + ")");
  }
  for (const auto& p : points) {
    if (p.size() != points[0].size()) throw DimensionError("kmeans: mixed dimensions");
  }

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  parallel_for(outcomes.size(), config.workers, [&](std::size_t r) {
    Rng rng = make_stream(config.seed, r);
    outcomes[r] = run_restart(points, config, rng);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r) {
    if (outcomes[r].sse < outcomes[best].sse) best = r;
  }
  KMeansResult result;
  result.labels = Partition(std::move(outcomes[best].labels));
  result.centroids = std::move(outcomes[best].centroids);
  result.history = std::move(outcomes[best].history);
  result.best_restart = static_cast<int>(best);
  result.compactness = compactness(points, result.labels);
  return result;
}

}  // namespace qlustering
