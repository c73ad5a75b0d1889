#include "qlustering/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qlustering/parallel.hpp"

namespace qlustering {

void FitConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("fit config: " + msg); };
  if (clusters < 1) fail("clusters must be >= 1");
  if (candidates < 1) fail("candidates must be >= 1");
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (patience < 1) fail("patience must be >= 1");
  if (!(h_max > 0.0)) fail("h_max must be > 0");
  if (!(init_scale >= 0.0) || init_scale > h_max) fail("init_scale must lie in [0, h_max]");
  if (!(0.0 < t_lo && t_lo < t_hi && t_hi < 1.0)) fail("need 0 < t_lo < t_hi < 1");
  if (cost == CostKind::localization && clusters != 2) {
    fail("localization cost needs exactly 2 output nodes");
  }
  if (workers < 1) fail("workers must be >= 1");
}

int assign_label(const Eigen::VectorXd& j_norm) {
  if (j_norm.size() == 0) throw DimensionError("empty current vector");
  int best = 0;
  for (int r = 1; r < j_norm.size(); ++r) {
    if (j_norm(r) > j_norm(best)) best = r;
  }
  return best;
}

int assign_localization_label(const Eigen::VectorXd& j_norm, double t_hi) {
  if (j_norm.size() != 2) throw DimensionError("localization needs two outputs");
  return j_norm.maxCoeff() > t_hi ? 0 : 1;
}

double clustering_cost(std::span<const Eigen::VectorXd> currents) {
  double total = 0.0;
  for (const auto& j : currents) {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(j.size());
    target(assign_label(j)) = 1.0;
    total += (target - j).squaredNorm();
  }
  return total;
}

Eigen::Vector2d localization_tag(const Eigen::VectorXd& j, double t_lo, double t_hi) {
  if (j.size() != 2) throw DimensionError("localization cost needs two outputs");
  const Eigen::Vector2d first(1.0, 0.0);
  const Eigen::Vector2d second(0.0, 1.0);
  const Eigen::Vector2d balanced(0.5, 0.5);
  if (j(0) > t_hi) return first;
  if (j(1) > t_hi) return second;
  auto in_band = [&](double v) { return v >= t_lo && v <= t_hi; };
  if (in_band(j(0)) && in_band(j(1))) return balanced;
  // Only reachable off the simplex; fall back to the nearest tag.
  const Eigen::Vector2d jj(j(0), j(1));
  const Eigen::Vector2d* best = &first;
  for (const auto* tag : {&second, &balanced}) {
    if ((*tag - jj).squaredNorm() < (*best - jj).squaredNorm()) best = tag;
  }
  return *best;
}

double localization_cost(std::span<const Eigen::VectorXd> currents, double t_lo,
                         double t_hi) {
  double total = 0.0;
  for (const auto& j : currents) {
    const Eigen::Vector2d tag = localization_tag(j, t_lo, t_hi);
    total += (tag - Eigen::Vector2d(j(0), j(1))).squaredNorm();
  }
  return total;
}

Hamiltonian init_hamiltonian(const NetworkTopology& topo, double init_scale, Rng& rng) {
  const int n = topo.size();
  Hamiltonian h{Eigen::MatrixXd::Zero(n, n)};
  std::uniform_real_distribution<double> draw(-init_scale, init_scale);
  for (const auto& [i, j] : topo.trainable_entries()) {
    const double v = init_scale > 0.0 ? draw(rng) : 0.0;
    h.couplings(i, j) = v;
    h.couplings(j, i) = v;
  }
  return h;
}

std::vector<Hamiltonian> propose_candidates(const Hamiltonian& h,
                                            const NetworkTopology& topo, int p,
                                            double h_max, Rng& rng) {
  if (p < 1) throw ConfigError("need at least one candidate per iteration");
  const auto& entries = topo.trainable_entries();
  if (entries.empty()) throw MaskViolation("topology has no trainable couplings");
  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  const auto [i, j] = entries[pick(rng)];
  std::uniform_real_distribution<double> draw(-h_max, h_max);
  std::vector<Hamiltonian> out;
  out.reserve(static_cast<std::size_t>(p));
  for (int c = 0; c < p; ++c) {
    Hamiltonian cand = h;
    const double v = draw(rng);
    cand.couplings(i, j) = v;
    cand.couplings(j, i) = v;
    out.push_back(std::move(cand));
  }
  return out;
}

std::vector<Eigen::VectorXd> evaluate_currents(const Hamiltonian& h,
                                               std::span<const InputState> data,
                                               const DissipationRates& rates,
                                               const NetworkTopology& topo,
                                               CurrentMode mode) {
  const CurrentKernel kernel(h, rates, topo);
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.size());
  for (const auto& psi : data) {
    // Normalizing also enforces the dead-network floor in raw mode.
    Eigen::VectorXd normalized = kernel.normalized_currents(psi);
    out.push_back(mode == CurrentMode::normalized ? std::move(normalized)
                                                  : kernel.currents(psi));
  }
  return out;
}

double evaluate_cost(std::span<const Eigen::VectorXd> currents, const FitConfig& config) {
  return config.cost == CostKind::clustering
             ? clustering_cost(currents)
             : localization_cost(currents, config.t_lo, config.t_hi);
}

std::vector<int> assign_labels(std::span<const Eigen::VectorXd> currents,
                               const FitConfig& config) {
  std::vector<int> labels;
  labels.reserve(currents.size());
  for (const auto& j : currents) {
    labels.push_back(config.cost == CostKind::clustering
                         ? assign_label(j)
                         : assign_localization_label(j, config.t_hi));
  }
  return labels;
}

FitResult qluster_fit(std::span<const InputState> data, const NetworkTopology& topo,
                      const DissipationRates& rates, const FitConfig& config) {
  config.validate();
  rates.validate();
  if (config.clusters != topo.outputs()) {
    throw ConfigError("fit config clusters (" + std::to_string(config.clusters) +
                      ") differs from topology outputs (" +
                      std::to_string(topo.outputs()) + ")");
  }
  if (data.empty()) throw DimensionError("cannot fit an empty dataset");
  for (const auto& psi : data) {
    if (psi.size() != topo.inputs()) {
      throw DimensionError("sample length " + std::to_string(psi.size()) +
                           " differs from topology inputs " +
                           std::to_string(topo.inputs()));
    }
  }

  FitResult result;
  if (static_cast<int>(data.size()) < config.clusters) {
    result.warnings.push_back("dataset has fewer samples than clusters");
  }

  // Localization thresholds live on the simplex.
  const CurrentMode mode =
      config.cost == CostKind::localization ? CurrentMode::normalized : config.current_mode;

  Rng init_rng = make_stream(config.seed, 0);
  Hamiltonian incumbent = init_hamiltonian(topo, config.init_scale, init_rng);
  std::vector<Eigen::VectorXd> currents;
  try {
    currents = evaluate_currents(incumbent, data, rates, topo, mode);
  } catch (const Error& e) {
    throw InitFailure(std::string("initial Hamiltonian could not be evaluated (") +
                      e.what() + "); try a different seed or a larger init_scale");
  }
  double incumbent_cost = evaluate_cost(currents, config);
  result.cost_trace.push_back(incumbent_cost);

  const double infinity = std::numeric_limits<double>::infinity();
  std::vector<double> costs(static_cast<std::size_t>(config.candidates));
  int stall = 0;
  int iteration = 0;
  while (iteration < config.max_iters && stall < config.patience) {
    ++iteration;
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(iteration));
    const auto candidates =
        propose_candidates(incumbent, topo, config.candidates, config.h_max, rng);
    parallel_for(candidates.size(), config.workers, [&](std::size_t c) {
      try {
        const auto trial =
            evaluate_currents(candidates[c], data, rates, topo, mode);
        costs[c] = evaluate_cost(trial, config);
      } catch (const Error&) {
        costs[c] = infinity;
      }
    });
    const auto best = std::min_element(costs.begin(), costs.end()) - costs.begin();
    if (costs[static_cast<std::size_t>(best)] < incumbent_cost) {
      incumbent = candidates[static_cast<std::size_t>(best)];
      incumbent_cost = costs[static_cast<std::size_t>(best)];
      stall = 0;
    } else {
      ++stall;
    }
    result.cost_trace.push_back(incumbent_cost);
  }

  result.raw_currents = evaluate_currents(incumbent, data, rates, topo, CurrentMode::raw);
  result.currents.reserve(data.size());
  for (const auto& j : result.raw_currents) result.currents.push_back(normalize_currents(j));
  result.labels = assign_labels(result.currents, config);
  result.hamiltonian = std::move(incumbent);
  result.iterations_run = iteration;
  return result;
}

}  // namespace qlustering
