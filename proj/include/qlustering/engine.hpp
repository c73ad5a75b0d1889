#pragma once

// Stochastic hill-climbing over the network Hamiltonian: at every iteration a
// single permitted coupling is redrawn for `candidates` trial values and the
// best trial replaces the incumbent only if it strictly lowers the cost.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlustering/random.hpp"
#include "qlustering/transport.hpp"

namespace qlustering {

enum class CostKind { clustering, localization };

/// Which current vector the clustering cost sees. Raw extraction currents keep
/// the dependence of the total throughput on the input state; normalized
/// currents are the per-sample output distribution. The localization cost
/// always uses normalized currents.
enum class CurrentMode { raw, normalized };

struct FitConfig {
  int clusters = 2;
  int candidates = 8;
  int max_iters = 2000;
  int patience = 200;
  double h_max = 1.0;
  double init_scale = 1.0;
  CostKind cost = CostKind::clustering;
  CurrentMode current_mode = CurrentMode::raw;
  double t_lo = 0.4;
  double t_hi = 0.6;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct FitResult {
  Hamiltonian hamiltonian;
  std::vector<int> labels;
  /// Per-sample normalized currents (entries sum to 1).
  std::vector<Eigen::VectorXd> currents;
  /// Per-sample raw extraction currents.
  std::vector<Eigen::VectorXd> raw_currents;
  /// Incumbent cost after initialization (entry 0) and after every iteration.
  std::vector<double> cost_trace;
  int iterations_run = 0;
  std::vector<std::string> warnings;
};

/// Index of the largest entry; ties go to the lowest index.
int assign_label(const Eigen::VectorXd& j_norm);

/// Localization classes: 0 when one output carries more than t_hi of the
/// current, 1 when the current sits in the balanced band.
int assign_localization_label(const Eigen::VectorXd& j_norm, double t_hi);

/// sum_n |I_n - J_n|^2 with I_n one-hot at argmax(J_n).
double clustering_cost(std::span<const Eigen::VectorXd> currents);

/// Target tag for one two-output current vector.
Eigen::Vector2d localization_tag(const Eigen::VectorXd& j, double t_lo, double t_hi);

double localization_cost(std::span<const Eigen::VectorXd> currents, double t_lo,
                         double t_hi);

Hamiltonian init_hamiltonian(const NetworkTopology& topo, double init_scale, Rng& rng);

std::vector<Hamiltonian> propose_candidates(const Hamiltonian& h,
                                            const NetworkTopology& topo, int p,
                                            double h_max, Rng& rng);

/// Raw or normalized currents for every sample under a fixed Hamiltonian.
std::vector<Eigen::VectorXd> evaluate_currents(const Hamiltonian& h,
                                               std::span<const InputState> data,
                                               const DissipationRates& rates,
                                               const NetworkTopology& topo,
                                               CurrentMode mode = CurrentMode::normalized);

double evaluate_cost(std::span<const Eigen::VectorXd> currents, const FitConfig& config);

std::vector<int> assign_labels(std::span<const Eigen::VectorXd> currents,
                               const FitConfig& config);

FitResult qluster_fit(std::span<const InputState> data, const NetworkTopology& topo,
                      const DissipationRates& rates, const FitConfig& config);

}  // namespace qlustering
