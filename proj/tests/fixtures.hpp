#pragma once

// Seeded generators shared by the unit and acceptance tests.

#include <cstdint>
#include <random>

#include "sdepi/graphcore.hpp"

namespace fixtures {

inline sdepi::Matrix random_nonnegative(std::mt19937_64& rng, int n, double density = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sdepi::Matrix m = sdepi::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && u(rng) < density) m(i, j) = u(rng);
  return m;
}

inline sdepi::Matrix random_symmetric(std::mt19937_64& rng, int n, double density = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sdepi::Matrix m = sdepi::Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < density) m(i, j) = m(j, i) = u(rng);
  return m;
}

/// Random digraph with a Hamiltonian cycle added, so it is strongly connected.
inline sdepi::Matrix random_strongly_connected(std::mt19937_64& rng, int n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sdepi::Matrix m = random_nonnegative(rng, n, density);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    if (i != j && m(i, j) == 0.0) m(i, j) = 0.5 + u(rng);
  }
  return m;
}

/// The 20-node graph of the desk-scale regime checks: edge probability
/// 0.25, weights uniform in [0.5, 1.5], normalized to mean column weight 1.
inline sdepi::LocalityGraph desk_graph() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sdepi::Matrix m = sdepi::Matrix::Zero(20, 20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      if (i != j && u(rng) < 0.25) m(i, j) = 0.5 + u(rng);
  return sdepi::normalize_mean_column_weight(sdepi::LocalityGraph::from_dense(m));
}

inline sdepi::Matrix complete(int n) {
  sdepi::Matrix m = sdepi::Matrix::Ones(n, n);
  m.diagonal().setZero();
  return m;
}

inline sdepi::Matrix star(int leaves) {
  sdepi::Matrix m = sdepi::Matrix::Zero(leaves + 1, leaves + 1);
  for (int i = 1; i <= leaves; ++i) m(0, i) = m(i, 0) = 1.0;
  return m;
}

}  // namespace fixtures
