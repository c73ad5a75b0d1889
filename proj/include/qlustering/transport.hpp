#pragma once

// Single-exciton Lindblad transport through a layered tight-binding network.
//
// Node order everywhere is inputs, hidden, outputs. Density matrices live on
// the (n+1)-dimensional space {vacuum, site_0, ..., site_{n-1}} with the
// vacuum at index 0.

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qlustering/errors.hpp"

namespace qlustering {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Which within-layer couplings the default layered mask permits.
struct LayerCouplings {
  bool hidden_hidden = true;
  bool input_input = false;
  bool output_output = false;
  bool on_site = true;
};

class NetworkTopology {
 public:
  /// Layered mask: input<->hidden, hidden<->output, plus the within-layer
  /// blocks selected in `couplings`. Input<->output is permitted only when
  /// there is no hidden layer.
  static NetworkTopology layered(int inputs, int hidden, int outputs,
                                 LayerCouplings couplings = {});

  /// Custom mask; throws MaskViolation if asymmetric or if, with a hidden
  /// layer present, it links an input node to an output node directly.
  NetworkTopology(int inputs, int hidden, int outputs, BoolMatrix mask);

  int inputs() const { return inputs_; }
  int hidden() const { return hidden_; }
  int outputs() const { return outputs_; }
  int size() const { return inputs_ + hidden_ + outputs_; }

  int input_node(int i) const { return i; }
  int hidden_node(int m) const { return inputs_ + m; }
  int output_node(int r) const { return inputs_ + hidden_ + r; }

  const BoolMatrix& mask() const { return mask_; }
  bool permits(int i, int j) const { return mask_(i, j); }

  /// Trainable (i, j) pairs with i <= j, row-major order.
  const std::vector<std::pair<int, int>>& trainable_entries() const { return entries_; }

 private:
  int inputs_;
  int hidden_;
  int outputs_;
  BoolMatrix mask_;
  std::vector<std::pair<int, int>> entries_;
};

/// Real symmetric coupling matrix h_ij in units of the reference hopping.
struct Hamiltonian {
  Eigen::MatrixXd couplings;

  /// Throws DimensionError / MaskViolation when `couplings` is not a symmetric
  /// n x n matrix supported on the mask, or exceeds `h_max` in magnitude.
  void validate(const NetworkTopology& topo, double h_max = -1.0) const;
};

/// Real unit-norm amplitude vector injected on the input nodes.
class InputState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit InputState(Eigen::VectorXd amplitudes);

  const Eigen::VectorXd& amplitudes() const { return amplitudes_; }
  int size() const { return static_cast<int>(amplitudes_.size()); }

 private:
  Eigen::VectorXd amplitudes_;
};

struct DissipationRates {
  double gamma_in = 1.0;
  double gamma_out = 1.0;

  void validate() const;
};

/// Density matrix over {vacuum} + single-exciton site states.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {}

  static DensityMatrix vacuum(int sites);

  const CMatrix& matrix() const { return rho_; }
  int sites() const { return static_cast<int>(rho_.rows()) - 1; }
  Complex operator()(int i, int j) const { return rho_(i, j); }

  double trace() const { return rho_.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;

 private:
  CMatrix rho_;
};

/// Explicit (n+1)^2 x (n+1)^2 matrix of the GKSL generator acting on
/// column-stacked density matrices.
class LindbladGenerator {
 public:
  LindbladGenerator(CMatrix superoperator, int dimension)
      : superop_(std::move(superoperator)), dim_(dimension) {}

  int dimension() const { return dim_; }
  const CMatrix& matrix() const { return superop_; }

  CMatrix apply(const CMatrix& rho) const;

 private:
  CMatrix superop_;
  int dim_;
};

/// rho -> -i[H, rho] + D_in[rho] + sum_r D_out,r[rho] with
/// D[rho] = V rho V^dag - (V^dag V rho + rho V^dag V) / 2,
/// V_in = sqrt(gamma_in) |psi><vac|, V_out,r = sqrt(gamma_out) |vac><r|.
LindbladGenerator build_generator(const Hamiltonian& h, const InputState& psi,
                                  const DissipationRates& rates,
                                  const NetworkTopology& topo);

/// Dense constrained solve of G[rho] = 0, Tr rho = 1.
DensityMatrix steady_state(const LindbladGenerator& g);

/// Fixed-step RK4 integration of d rho / dt = G[rho].
DensityMatrix evolve(const DensityMatrix& rho0, const LindbladGenerator& g, double t,
                     double dt);

/// j_r = gamma_out * rho[r, r] for every output node r (raw extraction rates).
Eigen::VectorXd output_currents(const DensityMatrix& rho_s, const DissipationRates& rates,
                                const NetworkTopology& topo);

inline constexpr double kDefaultCurrentFloor = 1e-12;

/// j / sum(j); throws DeadNetwork when sum(j) < floor.
Eigen::VectorXd normalize_currents(const Eigen::VectorXd& j,
                                   double floor = kDefaultCurrentFloor);

/// Steady-state output currents for many input states under a fixed network.
///
/// At the fixed point the vacuum-site coherences vanish and the site block is
/// X = gamma_in * rho_00 * Y, where Y solves A Y + Y A^dag = -|psi><psi| with
/// A = -iH - Gamma/2 (Gamma = gamma_out on the output diagonal). Each output
/// population is therefore a quadratic form psi^T K_r psi whose kernel solves
/// the adjoint Lyapunov equation A^dag K + K A = -|r><r|. The kernels are
/// computed once per Hamiltonian via a complex Schur factorization, after
/// which every sample costs O(q L^2).
class CurrentKernel {
 public:
  CurrentKernel(const Hamiltonian& h, const DissipationRates& rates,
                const NetworkTopology& topo);

  int inputs() const { return inputs_; }
  int outputs() const { return static_cast<int>(output_kernels_.size()); }

  /// Raw currents; equal to output_currents(steady_state(build_generator(...))).
  Eigen::VectorXd currents(const InputState& psi) const;
  Eigen::VectorXd normalized_currents(const InputState& psi,
                                      double floor = kDefaultCurrentFloor) const;

  /// Vacuum population rho_00 of the steady state for `psi`.
  double vacuum_population(const InputState& psi) const;

 private:
  Eigen::VectorXd output_populations_per_injection(const Eigen::VectorXd& psi) const;

  int inputs_;
  double gamma_in_;
  double gamma_out_;
  std::vector<Eigen::MatrixXd> output_kernels_;
  Eigen::MatrixXd occupancy_kernel_;
};

}  // namespace qlustering
