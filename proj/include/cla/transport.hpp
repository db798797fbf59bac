#pragma once

// Exact optimal transport on small finite supports via successive shortest
// paths with Johnson potentials (dense Dijkstra, O(n^2) per augmentation).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cla/error.hpp"

namespace cla {

struct TransportResult {
  double cost = 0.0;
  /// flow[i][j]: mass moved from supply atom i to demand atom j.
  std::vector<std::vector<double>> flow;
};

/// Minimum-cost transport of `supply` onto `demand` (equal totals) where
/// cost(i, j) >= 0 is the unit cost from supply atom i to demand atom j.
template <class CostFn>
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand, CostFn&& cost,
                                double tol = 1e-14) {
  const std::size_t ns = supply.size();
  const std::size_t nt = demand.size();
  constexpr double inf = std::numeric_limits<double>::infinity();

  double sum_s = 0.0, sum_t = 0.0;
  for (double v : supply) sum_s += v;
  for (double v : demand) sum_t += v;
  require(std::abs(sum_s - sum_t) <= 1e-9 * std::max(1.0, sum_s), ErrorCode::invalid_argument,
          "transport totals differ");

  std::vector<std::vector<double>> c(ns, std::vector<double>(nt));
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) c[i][j] = cost(i, j);

  TransportResult res;
  res.flow.assign(ns, std::vector<double>(nt, 0.0));
  std::vector<double> left_s(supply.begin(), supply.end());
  std::vector<double> left_t(demand.begin(), demand.end());

  // Nodes 0..ns-1 are supply atoms, ns..ns+nt-1 demand atoms.
  const std::size_t n = ns + nt;
  std::vector<double> pot(n, 0.0), dist(n);
  std::vector<std::size_t> parent(n);
  std::vector<char> done(n);
  const std::size_t none = n;

  while (true) {
    double remaining = 0.0;
    for (double v : left_s) remaining += v;
    if (remaining <= tol) break;

    std::fill(dist.begin(), dist.end(), inf);
    std::fill(done.begin(), done.end(), 0);
    std::fill(parent.begin(), parent.end(), none);
    for (std::size_t i = 0; i < ns; ++i)
      if (left_s[i] > tol) dist[i] = std::max(0.0, -pot[i]);

    std::size_t best_sink = none;
    double best = inf;
    for (std::size_t iter = 0; iter < n; ++iter) {
      std::size_t u = none;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
      if (u == none) break;
      done[u] = 1;
      if (u < ns) {
        for (std::size_t j = 0; j < nt; ++j) {
          const std::size_t v = ns + j;
          if (done[v]) continue;
          const double nd = dist[u] + std::max(0.0, c[u][j] + pot[u] - pot[v]);
          if (nd < dist[v]) {
            dist[v] = nd;
            parent[v] = u;
          }
        }
      } else {
        const std::size_t j = u - ns;
        if (left_t[j] > tol && dist[u] + pot[u] < best) {
          best = dist[u] + pot[u];
          best_sink = u;
        }
        for (std::size_t i = 0; i < ns; ++i) {
          if (done[i] || res.flow[i][j] <= tol) continue;
          const double nd = dist[u] + std::max(0.0, -c[i][j] + pot[u] - pot[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }
    if (best_sink == none) break;

    // Bottleneck along the path, then augment.
    std::size_t v = best_sink;
    double delta = left_t[v - ns];
    while (parent[v] != none) {
      const std::size_t u = parent[v];
      if (u >= ns) delta = std::min(delta, res.flow[v][u - ns]);  // reverse arc
      v = u;
    }
    delta = std::min(delta, left_s[v]);
    const std::size_t origin = v;

    v = best_sink;
    while (parent[v] != none) {
      const std::size_t u = parent[v];
      if (u < ns) {
        res.flow[u][v - ns] += delta;
      } else {
        res.flow[v][u - ns] -= delta;
      }
      v = u;
    }
    left_s[origin] -= delta;
    left_t[best_sink - ns] -= delta;

    // Unreachable nodes never regain incoming residual arcs, so their
    // potentials can stay as they are.
    for (std::size_t k = 0; k < n; ++k)
      if (dist[k] < inf) pot[k] += dist[k];
  }

  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) res.cost += res.flow[i][j] * c[i][j];
  return res;
}

}  // namespace cla
