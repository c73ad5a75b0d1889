#include "qlustering/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qlustering {
namespace {

constexpr Complex kI{0.0, 1.0};

// Relative pivot threshold used to decide the null-space dimension of G.
constexpr double kRankThreshold = 1e-11;
constexpr double kResidualTolerance = 1e-10;
constexpr double kPsdTolerance = 1e-9;
constexpr double kTraceDriftTolerance = 1e-6;
// A Schur eigenvalue of -iH - Gamma/2 with decay below this (relative) is a dark mode.
constexpr double kDarkModeTolerance = 1e-12;

std::string dims(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

// Column-stacking convention: vec(A X B) = (B^T (x) A) vec(X).
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void add_dissipator(CMatrix& superop, const CMatrix& v) {
  const Eigen::Index d = v.rows();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix vdv = v.adjoint() * v;
  superop += kron(v.conjugate(), v);
  superop -= 0.5 * kron(id, vdv);
  superop -= 0.5 * kron(vdv.transpose(), id);
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

// Solves T^dag K + K T = -B for upper-triangular T.
CMatrix solve_triangular_lyapunov(const CMatrix& t, const CMatrix& b) {
  const Eigen::Index n = t.rows();
  CMatrix k = CMatrix::Zero(n, n);
  for (Eigen::Index row = 0; row < n; ++row) {
    for (Eigen::Index col = 0; col < n; ++col) {
      Complex s = -b(row, col);
      for (Eigen::Index m = 0; m < row; ++m) s -= std::conj(t(m, row)) * k(m, col);
      for (Eigen::Index m = 0; m < col; ++m) s -= k(row, m) * t(m, col);
      k(row, col) = s / (std::conj(t(row, row)) + t(col, col));
    }
  }
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// NetworkTopology

NetworkTopology NetworkTopology::layered(int inputs, int hidden, int outputs,
                                         LayerCouplings couplings) {
  if (inputs < 1 || outputs < 1 || hidden < 0) {
    throw DimensionError("layered topology needs inputs >= 1, outputs >= 1, hidden >= 0");
  }
  const int n = inputs + hidden + outputs;
  BoolMatrix mask = BoolMatrix::Constant(n, n, false);
  auto layer = [&](int node) {
    if (node < inputs) return 0;
    if (node < inputs + hidden) return 1;
    return 2;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int a = layer(i);
      const int b = layer(j);
      bool allowed = false;
      if (i == j) {
        allowed = couplings.on_site;
      } else if (a != b) {
        // Without a hidden layer the input and output layers touch.
        allowed = std::abs(a - b) == 1 || hidden == 0;
      } else if (a == 0) {
        allowed = couplings.input_input;
      } else if (a == 1) {
        allowed = couplings.hidden_hidden;
      } else {
        allowed = couplings.output_output;
      }
      mask(i, j) = allowed;
    }
  }
  return NetworkTopology(inputs, hidden, outputs, std::move(mask));
}

NetworkTopology::NetworkTopology(int inputs, int hidden, int outputs, BoolMatrix mask)
    : inputs_(inputs), hidden_(hidden), outputs_(outputs), mask_(std::move(mask)) {
  if (inputs_ < 1 || outputs_ < 1 || hidden_ < 0) {
    throw DimensionError("topology needs inputs >= 1, outputs >= 1, hidden >= 0");
  }
  const int n = size();
  if (mask_.rows() != n || mask_.cols() != n) {
    throw DimensionError("mask is " + dims(mask_.rows(), mask_.cols()) + ", expected " +
                         dims(n, n));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (mask_(i, j) != mask_(j, i)) throw MaskViolation("mask is not symmetric");
    }
  }
  for (int i = 0; i < inputs_ && hidden_ > 0; ++i) {
    for (int r = 0; r < outputs_; ++r) {
      if (mask_(input_node(i), output_node(r))) {
        throw MaskViolation("mask links input node directly to output node");
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (mask_(i, j)) entries_.emplace_back(i, j);
    }
  }
}

// ---------------------------------------------------------------------------
// Hamiltonian, InputState, rates

void Hamiltonian::validate(const NetworkTopology& topo, double h_max) const {
  const int n = topo.size();
  if (couplings.rows() != n || couplings.cols() != n) {
    throw DimensionError("hamiltonian is " + dims(couplings.rows(), couplings.cols()) +
                         ", topology has " + std::to_string(n) + " nodes");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = couplings(i, j);
      if (!std::isfinite(v)) throw DimensionError("hamiltonian has non-finite entries");
      if (v != couplings(j, i)) throw MaskViolation("hamiltonian is not symmetric");
      if (v != 0.0 && !topo.permits(i, j)) {
        throw MaskViolation("coupling (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is forbidden by the mask");
      }
      if (h_max > 0.0 && std::abs(v) > h_max) {
        throw MaskViolation("coupling exceeds h_max");
      }
    }
  }
}

InputState::InputState(Eigen::VectorXd amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw DimensionError("empty input state");
  if (!amplitudes_.allFinite()) throw DimensionError("input state has non-finite entries");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "input state is not unit norm (|psi|^2 = " << norm2 << ")";
    throw DimensionError(os.str());
  }
}

void DissipationRates::validate() const {
  if (!std::isfinite(gamma_in) || !std::isfinite(gamma_out) || gamma_in < 0.0 ||
      gamma_out < 0.0) {
    throw ConfigError("dissipation rates must be finite and non-negative");
  }
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::vacuum(int sites) {
  CMatrix rho = CMatrix::Zero(sites + 1, sites + 1);
  rho(0, 0) = 1.0;
  return DensityMatrix(std::move(rho));
}

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(rho_), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Generator

CMatrix LindbladGenerator::apply(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw DimensionError("density matrix is " + dims(rho.rows(), rho.cols()) +
                         ", generator acts on " + dims(dim_, dim_));
  }
  CVector out = superop_ * Eigen::Map<const CVector>(rho.data(), rho.size());
  return Eigen::Map<const CMatrix>(out.data(), dim_, dim_);
}

LindbladGenerator build_generator(const Hamiltonian& h, const InputState& psi,
                                  const DissipationRates& rates,
                                  const NetworkTopology& topo) {
  h.validate(topo);
  rates.validate();
  if (psi.size() != topo.inputs()) {
    throw DimensionError("input state has " + std::to_string(psi.size()) +
                         " amplitudes, topology has " + std::to_string(topo.inputs()) +
                         " inputs");
  }
  const int n = topo.size();
  const int d = n + 1;
  const CMatrix id = CMatrix::Identity(d, d);

  CMatrix h_emb = CMatrix::Zero(d, d);
  h_emb.bottomRightCorner(n, n) = h.couplings.cast<Complex>();
  CMatrix superop = -kI * (kron(id, h_emb) - kron(h_emb.transpose(), id));

  CMatrix v_in = CMatrix::Zero(d, d);
  for (int i = 0; i < topo.inputs(); ++i) {
    v_in(1 + topo.input_node(i), 0) = std::sqrt(rates.gamma_in) * psi.amplitudes()(i);
  }
  add_dissipator(superop, v_in);

  for (int r = 0; r < topo.outputs(); ++r) {
    CMatrix v_out = CMatrix::Zero(d, d);
    v_out(0, 1 + topo.output_node(r)) = std::sqrt(rates.gamma_out);
    add_dissipator(superop, v_out);
  }
  return LindbladGenerator(std::move(superop), d);
}

DensityMatrix steady_state(const LindbladGenerator& g) {
  const int d = g.dimension();
  const CMatrix& full = g.matrix();

  Eigen::FullPivLU<CMatrix> rank_check(full);
  rank_check.setThreshold(kRankThreshold);
  if (rank_check.dimensionOfKernel() > 1) {
    throw NonUniqueSteadyState("generator null space has dimension " +
                               std::to_string(rank_check.dimensionOfKernel()) +
                               "; part of the network is decoupled from the outputs");
  }

  // Replace the vacuum-population equation with Tr rho = 1.
  CMatrix constrained = full;
  constrained.row(0).setZero();
  for (int k = 0; k < d; ++k) constrained(0, k * d + k) = 1.0;
  CVector rhs = CVector::Zero(d * d);
  rhs(0) = 1.0;

  Eigen::PartialPivLU<CMatrix> lu(constrained);
  CVector x = lu.solve(rhs);
  if (!x.allFinite()) throw SingularSystem("constrained steady-state solve failed");

  CMatrix rho = hermitian_part(Eigen::Map<const CMatrix>(x.data(), d, d));
  rho /= rho.trace().real();

  const double residual = g.apply(rho).norm();
  if (residual > kResidualTolerance * std::max(1.0, rho.norm())) {
    std::ostringstream os;
    os << "steady-state residual " << residual << " exceeds tolerance";
    throw SingularSystem(os.str());
  }
  DensityMatrix out(std::move(rho));
  const double lowest = out.min_eigenvalue();
  if (lowest < -kPsdTolerance) {
    std::ostringstream os;
    os << "steady state has negative eigenvalue " << lowest;
    throw SingularSystem(os.str());
  }
  return out;
}

DensityMatrix evolve(const DensityMatrix& rho0, const LindbladGenerator& g, double t,
                     double dt) {
  if (!(dt > 0.0)) throw IntegrationError("evolve requires dt > 0");
  if (!(t >= 0.0)) throw IntegrationError("evolve requires t >= 0");
  const int d = g.dimension();
  if (rho0.matrix().rows() != d) {
    throw DimensionError("initial state does not match generator dimension");
  }
  const double trace0 = rho0.trace();
  const CMatrix& superop = g.matrix();
  CVector x = Eigen::Map<const CVector>(rho0.matrix().data(), d * d);

  double elapsed = 0.0;
  while (elapsed < t) {
    const double h = std::min(dt, t - elapsed);
    const CVector k1 = superop * x;
    const CVector k2 = superop * (x + 0.5 * h * k1);
    const CVector k3 = superop * (x + 0.5 * h * k2);
    const CVector k4 = superop * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    Eigen::Map<CMatrix> rho(x.data(), d, d);
    rho = hermitian_part(rho).eval();
    elapsed += h;

    const double drift = std::abs(rho.trace().real() - trace0);
    if (!x.allFinite() || drift > kTraceDriftTolerance) {
      std::ostringstream os;
      os << "RK4 unstable at t = " << elapsed << " (trace drift " << drift
         << "); reduce dt below " << dt;
      throw IntegrationError(os.str());
    }
  }
  return DensityMatrix(Eigen::Map<const CMatrix>(x.data(), d, d));
}

Eigen::VectorXd output_currents(const DensityMatrix& rho_s, const DissipationRates& rates,
                                const NetworkTopology& topo) {
  if (rho_s.sites() != topo.size()) {
    throw DimensionError("density matrix does not match topology size");
  }
  Eigen::VectorXd j(topo.outputs());
  for (int r = 0; r < topo.outputs(); ++r) {
    const int idx = 1 + topo.output_node(r);
    const double pop = rho_s(idx, idx).real();
    if (pop < -kPsdTolerance) {
      throw SingularSystem("negative output population; not a valid steady state");
    }
    j(r) = rates.gamma_out * std::max(pop, 0.0);
  }
  return j;
}

Eigen::VectorXd normalize_currents(const Eigen::VectorXd& j, double floor) {
  const double total = j.sum();
  if (!(total >= floor)) {
    std::ostringstream os;
    os << "total output current " << total << " below floor " << floor;
    throw DeadNetwork(os.str());
  }
  return j / total;
}

// ---------------------------------------------------------------------------
// CurrentKernel

CurrentKernel::CurrentKernel(const Hamiltonian& h, const DissipationRates& rates,
                             const NetworkTopology& topo)
    : inputs_(topo.inputs()), gamma_in_(rates.gamma_in), gamma_out_(rates.gamma_out) {
  h.validate(topo);
  rates.validate();
  const int n = topo.size();

  CMatrix a = -kI * h.couplings.cast<Complex>();
  for (int r = 0; r < topo.outputs(); ++r) {
    const int node = topo.output_node(r);
    a(node, node) -= 0.5 * rates.gamma_out;
  }

  Eigen::ComplexSchur<CMatrix> schur(a);
  if (schur.info() != Eigen::Success) throw SingularSystem("Schur factorization failed");
  const CMatrix& u = schur.matrixU();
  const CMatrix& t = schur.matrixT();

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k) {
    if (t(k, k).real() > -kDarkModeTolerance * scale) {
      throw NonUniqueSteadyState(
          "effective Hamiltonian has a non-decaying mode; part of the network is "
          "decoupled from the outputs");
    }
  }

  const CMatrix u_in = u.topRows(inputs_);
  auto restrict_kernel = [&](const CMatrix& b) -> Eigen::MatrixXd {
    const CMatrix k = solve_triangular_lyapunov(t, b);
    const CMatrix full = u_in * k * u_in.adjoint();
    // Only the real symmetric part contributes to psi^T K psi for real psi.
    Eigen::MatrixXd re = full.real();
    return 0.5 * (re + re.transpose());
  };

  output_kernels_.reserve(topo.outputs());
  for (int r = 0; r < topo.outputs(); ++r) {
    const auto row = u.row(topo.output_node(r));
    output_kernels_.push_back(restrict_kernel(row.adjoint() * row));
  }
  occupancy_kernel_ = restrict_kernel(CMatrix::Identity(n, n));
}

Eigen::VectorXd CurrentKernel::output_populations_per_injection(
    const Eigen::VectorXd& psi) const {
  Eigen::VectorXd pops(outputs());
  for (int r = 0; r < outputs(); ++r) {
    pops(r) = std::max(0.0, psi.dot(output_kernels_[r] * psi));
  }
  return pops;
}

double CurrentKernel::vacuum_population(const InputState& psi) const {
  if (psi.size() != inputs_) throw DimensionError("input state length mismatch");
  const Eigen::VectorXd& v = psi.amplitudes();
  const double occupancy = std::max(0.0, v.dot(occupancy_kernel_ * v));
  return 1.0 / (1.0 + gamma_in_ * occupancy);
}

Eigen::VectorXd CurrentKernel::currents(const InputState& psi) const {
  if (psi.size() != inputs_) throw DimensionError("input state length mismatch");
  const double scale = gamma_out_ * gamma_in_ * vacuum_population(psi);
  return scale * output_populations_per_injection(psi.amplitudes());
}

Eigen::VectorXd CurrentKernel::normalized_currents(const InputState& psi,
                                                   double floor) const {
  return normalize_currents(currents(psi), floor);
}

}  // namespace qlustering
