#pragma once

// Seeded random networks, functions and subsets for property checks. Only
// raw mt19937_64 output is used, so draws are identical across standard
// libraries.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/forms.hpp"

namespace dformkit::random {

using Engine = std::mt19937_64;

inline double uniform(Engine& rng, double lo = 0.0, double hi = 1.0) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Uniform integer in [lo, hi].
inline std::size_t integer(Engine& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

struct NetworkShape {
  std::size_t min_vertices = 2;
  std::size_t max_vertices = 30;
  double extra_edge_probability = 0.2;
  bool connected = true;
  double killing_probability = 0.0;  ///< chance that a vertex carries killing
};

/// Conductances log-uniform on [0.1, 10]; killing uniform on [0, 2].
inline Network network(Engine& rng, const NetworkShape& shape) {
  const std::size_t n = integer(rng, shape.min_vertices, shape.max_vertices);
  std::vector<std::vector<bool>> present(n, std::vector<bool>(n, false));
  std::vector<Edge> edges;
  auto conductance = [&] { return std::pow(10.0, uniform(rng, -1.0, 1.0)); };
  if (shape.connected) {
    for (std::size_t v = 1; v < n; ++v) {
      const std::size_t u = integer(rng, 0, v - 1);
      present[u][v] = present[v][u] = true;
      edges.push_back({u, v, conductance()});
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!present[u][v] && uniform(rng) < shape.extra_edge_probability) {
        present[u][v] = present[v][u] = true;
        edges.push_back({u, v, conductance()});
      }
    }
  }
  Eigen::VectorXd killing = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    if (uniform(rng) < shape.killing_probability) killing[static_cast<Eigen::Index>(x)] = uniform(rng, 0.0, 2.0);
  }
  return Network::unlabeled(n, std::move(edges), std::move(killing));
}

inline Function function(Engine& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Function f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = uniform(rng, lo, hi);
  return f;
}

/// Random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<std::size_t> permutation(Engine& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[integer(rng, 0, i - 1)]);
  return p;
}

}  // namespace dformkit::random
