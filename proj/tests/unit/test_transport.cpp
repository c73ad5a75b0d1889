#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace qlustering;
using testing::connected_hamiltonian;
using testing::random_density;
using testing::random_unit;

namespace {

// Generator applied entry by entry from the master equation; no superoperator.
CMatrix direct_rhs(const Eigen::MatrixXd& h_sites, const Eigen::VectorXd& psi,
                   const std::vector<int>& outputs, double gin, double gout,
                   const CMatrix& rho) {
  const auto n = h_sites.rows();
  CMatrix h = CMatrix::Zero(n + 1, n + 1);
  h.bottomRightCorner(n, n) = h_sites.cast<Complex>();
  CMatrix out = Complex(0, -1) * (h * rho - rho * h);
  auto dissipate = [&](const CMatrix& v) {
    const CMatrix vdv = v.adjoint() * v;
    out += v * rho * v.adjoint() - 0.5 * (vdv * rho + rho * vdv);
  };
  CMatrix vin = CMatrix::Zero(n + 1, n + 1);
  for (int i = 0; i < psi.size(); ++i) vin(1 + i, 0) = std::sqrt(gin) * psi(i);
  dissipate(vin);
  for (int r : outputs) {
    CMatrix v = CMatrix::Zero(n + 1, n + 1);
    v(0, 1 + r) = std::sqrt(gout);
    dissipate(v);
  }
  return out;
}

}  // namespace

TEST_CASE("layered mask") {
  const auto topo = NetworkTopology::layered(3, 2, 5);
  CHECK(topo.size() == 10);
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 5; ++r) CHECK_FALSE(topo.permits(i, topo.output_node(r)));
  }
  CHECK(topo.permits(0, topo.hidden_node(1)));
  CHECK(topo.permits(topo.hidden_node(0), topo.hidden_node(1)));
  CHECK_FALSE(topo.permits(0, 1));
  CHECK_FALSE(topo.permits(topo.output_node(0), topo.output_node(1)));
  CHECK(topo.permits(4, 4));

  LayerCouplings c;
  c.on_site = false;
  c.hidden_hidden = false;
  const auto bare = NetworkTopology::layered(3, 2, 5, c);
  CHECK_FALSE(bare.permits(0, 0));
  // 3*2 input-hidden plus 2*5 hidden-output pairs.
  CHECK(bare.trainable_entries().size() == 16);

  BoolMatrix bad = topo.mask();
  bad(0, topo.output_node(0)) = bad(topo.output_node(0), 0) = true;
  CHECK_THROWS_AS(NetworkTopology(3, 2, 5, bad), MaskViolation);
  BoolMatrix asym = topo.mask();
  asym(0, 1) = true;
  CHECK_THROWS_AS(NetworkTopology(3, 2, 5, asym), MaskViolation);

  const auto flat = NetworkTopology::layered(2, 0, 2);
  CHECK(flat.permits(0, flat.output_node(1)));
  CHECK_FALSE(flat.permits(0, 1));
}

TEST_CASE("hamiltonian validation") {
  const auto topo = NetworkTopology::layered(2, 1, 2);
  Hamiltonian h{Eigen::MatrixXd::Zero(5, 5)};
  CHECK_NOTHROW(h.validate(topo));
  h.couplings(0, 3) = h.couplings(3, 0) = 0.5;
  CHECK_THROWS_AS(h.validate(topo), MaskViolation);
  h.couplings.setZero();
  h.couplings(0, 2) = 0.5;
  CHECK_THROWS_AS(h.validate(topo), MaskViolation);
  h.couplings(2, 0) = 0.5;
  CHECK_NOTHROW(h.validate(topo, 1.0));
  CHECK_THROWS(h.validate(topo, 0.25));
  CHECK_THROWS_AS(Hamiltonian{Eigen::MatrixXd::Zero(4, 4)}.validate(topo), DimensionError);
}

TEST_CASE("input state and rates") {
  CHECK_NOTHROW(InputState(Eigen::Vector2d(0.6, 0.8)));
  CHECK_THROWS_AS(InputState(Eigen::Vector2d(0.6, 0.81)), DimensionError);
  CHECK_THROWS(DissipationRates{-1.0, 1.0}.validate());
  CHECK_NOTHROW(DissipationRates{0.0, 0.0}.validate());
}

TEST_CASE("generator: zero rates and zero Hamiltonian annihilate every state") {
  Rng rng = make_stream(1, 0);
  const auto topo = NetworkTopology::layered(2, 1, 1);
  const auto g = build_generator(Hamiltonian{Eigen::MatrixXd::Zero(4, 4)},
                                 InputState(Eigen::Vector2d(1, 0)), {0.0, 0.0}, topo);
  const CMatrix rho = random_density(5, rng);
  CHECK(g.apply(rho).norm() == doctest::Approx(0.0));
}

TEST_CASE("generator: pure extraction from an output population") {
  const auto topo = NetworkTopology::layered(1, 0, 1);
  const double gamma = 0.7;
  const auto g = build_generator(Hamiltonian{Eigen::MatrixXd::Zero(2, 2)},
                                 InputState(Eigen::VectorXd::Ones(1)), {0.0, gamma}, topo);
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(2, 2) = 1.0;
  const CMatrix d = g.apply(rho);
  CHECK(d(2, 2).real() == doctest::Approx(-gamma));
  CHECK(d(0, 0).real() == doctest::Approx(gamma));
  CHECK(d.trace().real() == doctest::Approx(0.0));
}

TEST_CASE("generator: pure injection from the vacuum") {
  const auto topo = NetworkTopology::layered(2, 0, 1);
  const double gamma = 1.3;
  const Eigen::Vector2d psi(0.6, -0.8);
  const auto g = build_generator(Hamiltonian{Eigen::MatrixXd::Zero(3, 3)}, InputState(psi),
                                 {gamma, 0.0}, topo);
  const CMatrix d = g.apply(DensityMatrix::vacuum(3).matrix());
  CHECK(d(0, 0).real() == doctest::Approx(-gamma));
  CHECK(d(1, 1).real() == doctest::Approx(gamma * 0.36));
  CHECK(d(2, 2).real() == doctest::Approx(gamma * 0.64));
  CHECK(d(1, 2).real() == doctest::Approx(-gamma * 0.48));
}

TEST_CASE("generator matches the master equation written out directly") {
  Rng rng = make_stream(2, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto topo = NetworkTopology::layered(3, 2, 2);
    const auto h = connected_hamiltonian(topo, rng);
    const Eigen::VectorXd psi = random_unit(3, rng);
    const DissipationRates rates{0.3 + trial * 0.1, 0.2 + trial * 0.05};
    const auto g = build_generator(h, InputState(psi), rates, topo);
    const CMatrix rho = random_density(8, rng);
    const CMatrix expected = direct_rhs(h.couplings, psi, {5, 6}, rates.gamma_in,
                                        rates.gamma_out, rho);
    CHECK((g.apply(rho) - expected).norm() < 1e-12);
  }
}

TEST_CASE("two-site chain steady state against the closed form") {
  // Sites a (input) and b (output) coupled by h. Stationarity of rho_ab and
  // rho_bb gives rho_aa = rho_bb (1 + gout^2 / 4h^2), and current balance
  // gives gin rho_00 = gout rho_bb.
  for (double hab : {0.3, 1.0, 2.5}) {
    for (auto [gin, gout] : {std::pair{1.0, 1.0}, std::pair{0.4, 2.0}, std::pair{3.0, 0.5}}) {
      const auto topo = NetworkTopology::layered(1, 0, 1);
      Hamiltonian h{Eigen::MatrixXd::Zero(2, 2)};
      h.couplings(0, 1) = h.couplings(1, 0) = hab;
      const DissipationRates rates{gin, gout};
      const InputState psi(Eigen::VectorXd::Ones(1));
      const auto rho = steady_state(build_generator(h, psi, rates, topo));
      const double rbb = 1.0 / (gout / gin + 2.0 + gout * gout / (4.0 * hab * hab));
      CHECK(rho(2, 2).real() == doctest::Approx(rbb).epsilon(1e-10));
      CHECK(rho(1, 1).real() ==
            doctest::Approx(rbb * (1.0 + gout * gout / (4.0 * hab * hab))).epsilon(1e-10));
      CHECK(rho(0, 0).real() == doctest::Approx(gout * rbb / gin).epsilon(1e-10));
      const auto j = output_currents(rho, rates, topo);
      CHECK(j(0) == doctest::Approx(gout * rbb).epsilon(1e-10));
      CHECK(CurrentKernel(h, rates, topo).currents(psi)(0) ==
            doctest::Approx(gout * rbb).epsilon(1e-10));
    }
  }
}

TEST_CASE("no injection drains everything into the vacuum") {
  Rng rng = make_stream(3, 0);
  const auto topo = NetworkTopology::layered(2, 2, 2);
  const auto h = connected_hamiltonian(topo, rng);
  const auto rho = steady_state(build_generator(h, InputState(random_unit(2, rng)), {0.0, 1.0}, topo));
  CHECK(std::abs(rho(0, 0) - 1.0) < 1e-10);
  CHECK((rho.matrix() - DensityMatrix::vacuum(6).matrix()).norm() < 1e-10);
}

TEST_CASE("uncoupled sites make the steady state non-unique") {
  const auto topo = NetworkTopology::layered(1, 1, 1);
  Hamiltonian h{Eigen::MatrixXd::Zero(3, 3)};
  // Nothing is coupled, so population parked on the input or hidden site never leaves.
  const auto g = build_generator(h, InputState(Eigen::VectorXd::Ones(1)), {1.0, 1.0}, topo);
  CHECK_THROWS_AS(steady_state(g), NonUniqueSteadyState);
  CHECK_THROWS_AS(CurrentKernel(h, {1.0, 1.0}, topo), NonUniqueSteadyState);
}

TEST_CASE("steady state is a physical fixed point of long-time evolution") {
  Rng rng = make_stream(4, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto topo = NetworkTopology::layered(2, 2, 2);
    const auto h = connected_hamiltonian(topo, rng);
    const DissipationRates rates{1.0, 1.0};
    const auto g = build_generator(h, InputState(random_unit(2, rng)), rates, topo);
    const auto rho = steady_state(g);
    CHECK(g.apply(rho.matrix()).norm() < 1e-10);
    CHECK(rho.hermiticity_error() < 1e-12);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.min_eigenvalue() > -1e-9);
    const auto late = evolve(DensityMatrix::vacuum(6), g, 3000.0, 0.05);
    CHECK((late.matrix() - rho.matrix()).norm() < 1e-6);
  }
  const auto pair = NetworkTopology::layered(1, 0, 1);
  Hamiltonian h{Eigen::MatrixXd::Zero(2, 2)};
  h.couplings(0, 1) = h.couplings(1, 0) = 0.8;
  const auto g = build_generator(h, InputState(Eigen::VectorXd::Ones(1)), {1.0, 1.0}, pair);
  const auto late = evolve(DensityMatrix::vacuum(2), g, 400.0, 0.02);
  CHECK((late.matrix() - steady_state(g).matrix()).norm() < 1e-6);
}

TEST_CASE("RK4 reproduces an exactly solvable decay") {
  // Output population with gin = 0, H = 0 decays as exp(-gout t).
  const auto topo = NetworkTopology::layered(1, 0, 1);
  const auto g = build_generator(Hamiltonian{Eigen::MatrixXd::Zero(2, 2)},
                                 InputState(Eigen::VectorXd::Ones(1)), {0.0, 0.8}, topo);
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(2, 2) = 1.0;
  const auto out = evolve(DensityMatrix(rho), g, 2.0, 0.01);
  CHECK(out(2, 2).real() == doctest::Approx(std::exp(-1.6)).epsilon(1e-9));
  CHECK(out(0, 0).real() == doctest::Approx(1.0 - std::exp(-1.6)).epsilon(1e-9));
  CHECK_THROWS(evolve(DensityMatrix(rho), g, 1.0, 0.0));
}

TEST_CASE("current kernel agrees with the dense solve") {
  Rng rng = make_stream(5, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int l = 2 + trial % 3;
    const int m = 1 + trial % 3;
    const int q = 2 + trial % 2;
    const auto topo = NetworkTopology::layered(l, m, q);
    const auto h = connected_hamiltonian(topo, rng);
    const DissipationRates rates{0.2 + 0.3 * (trial % 4), 0.1 + 0.5 * (trial % 3)};
    const CurrentKernel kernel(h, rates, topo);
    for (int s = 0; s < 3; ++s) {
      const InputState psi(random_unit(l, rng));
      const auto rho = steady_state(build_generator(h, psi, rates, topo));
      const auto dense = output_currents(rho, rates, topo);
      const auto fast = kernel.currents(psi);
      CHECK((dense - fast).norm() < 1e-9 * std::max(1.0, dense.norm()));
      CHECK(kernel.vacuum_population(psi) == doctest::Approx(rho(0, 0).real()).epsilon(1e-9));
      // Whatever enters leaves through the outputs.
      CHECK(std::abs(fast.sum() - rates.gamma_in * rho(0, 0).real()) < 1e-8);
    }
  }
}

TEST_CASE("currents are invariant under joint rate and Hamiltonian scaling") {
  Rng rng = make_stream(6, 0);
  const auto topo = NetworkTopology::layered(3, 2, 3);
  const auto h = connected_hamiltonian(topo, rng);
  const InputState psi(random_unit(3, rng));
  const DissipationRates rates{0.7, 0.4};
  const double s = 3.5;
  const auto base = CurrentKernel(h, rates, topo).normalized_currents(psi);
  const auto scaled = CurrentKernel(Hamiltonian{s * h.couplings}, {s * 0.7, s * 0.4}, topo)
                          .normalized_currents(psi);
  CHECK((base - scaled).norm() < 1e-10);
  const auto raw = CurrentKernel(h, rates, topo).currents(psi);
  const auto raw_scaled = CurrentKernel(Hamiltonian{s * h.couplings}, {s * 0.7, s * 0.4}, topo)
                              .currents(psi);
  CHECK((s * raw - raw_scaled).norm() < 1e-10);
}

TEST_CASE("normalization") {
  const auto j = normalize_currents(Eigen::Vector3d(1, 2, 1));
  CHECK(j(1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(normalize_currents(Eigen::Vector3d::Zero()), DeadNetwork);
  CHECK_THROWS_AS(normalize_currents(Eigen::Vector2d(1e-14, 1e-14)), DeadNetwork);
}

TEST_CASE("output currents reject negative populations") {
  const auto topo = NetworkTopology::layered(1, 0, 1);
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(0, 0) = 1.0 + 1e-6;
  rho(2, 2) = -1e-6;
  CHECK_THROWS(output_currents(DensityMatrix(rho), {1.0, 1.0}, topo));
  rho(0, 0) = 1.0 + 1e-12;
  rho(2, 2) = -1e-12;
  CHECK(output_currents(DensityMatrix(rho), {1.0, 1.0}, topo)(0) == 0.0);
}
