#pragma once

#include <random>

#include "qlustering/engine.hpp"
#include "qlustering/random.hpp"
#include "qlustering/transport.hpp"

namespace testing {

using namespace qlustering;

inline Eigen::VectorXd random_unit(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v / v.norm();
}

// Hidden chain coupled to every input and output, so no site is dark.
inline Hamiltonian connected_hamiltonian(const NetworkTopology& topo, Rng& rng,
                                         double scale = 1.0) {
  Hamiltonian h = init_hamiltonian(topo, scale, rng);
  std::uniform_real_distribution<double> mag(0.3, 1.0);
  for (const auto& [i, j] : topo.trainable_entries()) {
    if (i != j && h.couplings(i, j) == 0.0) {
      h.couplings(i, j) = h.couplings(j, i) = scale * mag(rng);
    }
  }
  return h;
}

inline CMatrix random_density(int dim, Rng& rng) {
  std::normal_distribution<double> g;
  CMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace testing
