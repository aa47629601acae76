#pragma once

// Shared fixtures and independent oracles for the test suites. Oracle code
// deliberately takes different arithmetic routes than the library kernels.

#include "plap/analysis.hpp"
#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/solver.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace plap::testing {

inline Graph two_node_graph(double nu1 = 1.0, double nu2 = 1.0, double mu = 1.0) {
  GraphBuilder b;
  b.add_node("v1", nu1).add_node("v2", nu2).add_edge("v1", "v2", mu);
  return b.build();
}

inline Graph path3_graph() {
  GraphBuilder b;
  b.add_node("v1").add_node("v2").add_node("v3");
  b.add_edge("v1", "v2").add_edge("v2", "v3");
  return b.build();
}

inline NodeFunction nf(std::initializer_list<double> xs) {
  NodeFunction f(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) f[i++] = x;
  return f;
}

// Spanning tree plus extra random chords, random weights in [0.5, 2].
inline Graph random_connected_graph(int n, int extra_edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  GraphBuilder b;
  for (int v = 0; v < n; ++v) b.add_node("n" + std::to_string(v), weight(rng));
  std::vector<std::pair<int, int>> present;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    const int u = parent(rng);
    b.add_edge("n" + std::to_string(u), "n" + std::to_string(v), weight(rng));
    present.emplace_back(u, v);
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  for (int k = 0; k < extra_edges; ++k) {
    const int u = any(rng), v = any(rng);
    if (u == v) continue;
    const auto key = std::minmax(u, v);
    bool dup = false;
    for (auto& pr : present)
      if (std::minmax(pr.first, pr.second) == key) dup = true;
    if (dup) continue;
    b.add_edge("n" + std::to_string(u), "n" + std::to_string(v), weight(rng));
    present.emplace_back(u, v);
  }
  return b.build();
}

inline NodeFunction random_state(const Graph& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  NodeFunction f(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) f[v] = gauss(rng);
  return f;
}

// Direct per-node evaluation of the defining sum, traversing incident lists
// rather than the edge list and composing |a|^{p-2} a as pow(|a|, p-2) * a.
inline NodeFunction p_laplacian_oracle(const Graph& g, double p, const NodeFunction& f) {
  NodeFunction out(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    double s = 0.0;
    for (int e : g.incident_edges(v)) {
      const Edge& ed = g.edge(e);
      const int w = ed.tail == v ? ed.head : ed.tail;
      const double a = f[w] - f[v];
      if (a != 0.0) s += ed.mu * std::pow(std::abs(a), p - 2.0) * a;
    }
    out[v] = -s / g.nu(v);
  }
  return out;
}

// Closed form of the two-node difference h' = -2 |h|^{p-2} h, h(0) = h0 > 0.
inline double two_node_h(double p, double h0, double t) {
  if (p == 2.0) return h0 * std::exp(-2.0 * t);
  const double base = std::pow(h0, 2.0 - p) - 2.0 * (2.0 - p) * t;
  if (p < 2.0 && base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (2.0 - p));
}

// Exact two-node state (f1(t), f2(t)) for initial data (a, b), unit weights.
inline NodeFunction two_node_state(double p, double a, double b, double t) {
  const double mean = 0.5 * (a + b);
  const double h = two_node_h(p, b - a, t);
  return nf({mean - 0.5 * h, mean + 0.5 * h});
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace plap::testing
