#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "softgeo/detail/dsu.hpp"
#include "softgeo/graph.hpp"
#include "softgeo/points.hpp"
#include "softgeo/rng.hpp"

namespace softgeo {

struct ComponentSummary {
  std::size_t n_vertices = 0;
  std::size_t n_edges = 0;
  std::size_t n_components = 0;
  std::size_t n0 = 0;        // isolated vertices
  std::size_t l1 = 0;        // largest component order
  std::size_t l2 = 0;        // second largest, 0 when absent
  uint32_t min_degree = 0;
  bool connected = false;    // true for n <= 1
};

inline ComponentSummary component_summary(const SoftGraph& g) {
  ComponentSummary cs;
  cs.n_vertices = g.n;
  cs.n_edges = g.edges.size();
  if (g.n == 0) {
    cs.connected = true;
    return cs;
  }
  detail::DisjointSet dsu(g.n);
  for (const auto& [i, j] : g.edges) dsu.unite(i, j);
  cs.n_components = dsu.component_count();
  cs.connected = cs.n_components <= 1;

  std::unordered_map<uint32_t, std::size_t> size_of_root;
  for (uint32_t v = 0; v < g.n; ++v) ++size_of_root[dsu.find(v)];
  std::size_t l1 = 0, l2 = 0;
  for (const auto& [root, sz] : size_of_root) {
    if (sz > l1) {
      l2 = l1;
      l1 = sz;
    } else if (sz > l2) {
      l2 = sz;
    }
  }
  cs.l1 = l1;
  cs.l2 = l2;

  cs.min_degree = g.degrees.empty() ? 0 : g.degrees[0];
  for (uint32_t d : g.degrees) {
    if (d == 0) ++cs.n0;
    cs.min_degree = std::min(cs.min_degree, d);
  }
  return cs;
}

// counts[k] = number of components with exactly k vertices, 1 <= k <= max_order.
inline std::vector<std::size_t> small_component_counts(const SoftGraph& g,
                                                       std::size_t max_order) {
  std::vector<std::size_t> counts(max_order + 1, 0);
  if (g.n == 0) return counts;
  detail::DisjointSet dsu(g.n);
  for (const auto& [i, j] : g.edges) dsu.unite(i, j);
  std::unordered_map<uint32_t, std::size_t> size_of_root;
  for (uint32_t v = 0; v < g.n; ++v) ++size_of_root[dsu.find(v)];
  for (const auto& [root, sz] : size_of_root)
    if (sz <= max_order) ++counts[sz];
  return counts;
}

// sigma: radius at which the last vertex gains a retained edge. tau: radius
// at which the retained graph becomes connected (largest edge on a minimum
// spanning tree). Both are +infinity when the event never happens within the
// process cap; sigma <= tau holds deterministically.
struct ThresholdPair {
  double sigma = 0.0;
  double tau = 0.0;
};

inline ThresholdPair thresholds(const CoupledEdgeProcess& cp) {
  const std::size_t n = cp.n;
  if (n <= 1) return {0.0, 0.0};
  std::vector<double> first_edge(n, kInf);
  detail::DisjointSet dsu(n);
  double tau = kInf;
  // Edges come sorted by length, so the first retained edge at a vertex is
  // its minimum, and once the graph connects every vertex has been covered.
  for (const auto& e : cp.edges) {
    if (!e.retained) continue;
    first_edge[e.i] = std::min(first_edge[e.i], e.length);
    first_edge[e.j] = std::min(first_edge[e.j], e.length);
    if (dsu.unite(e.i, e.j) && dsu.component_count() == 1) {
      tau = e.length;
      break;
    }
  }
  double sigma = 0.0;
  for (double v : first_edge) sigma = std::max(sigma, v);
  return {sigma, tau};
}

// Same pair of thresholds without materializing the pair process: grow a
// search radius, scan only grid-adjacent pairs, and certify. A vertex's
// nearest retained edge found within R is its true nearest; connectivity
// established with edges <= R pins tau exactly. Uncertified rounds double R,
// and R = sqrt(d) covers every pair, so the final answer is always exact.
inline ThresholdPair thresholds_fast(const PointSet& pts, double p,
                                     uint64_t seed, uint32_t stream = 0) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("thresholds_fast: p must lie in (0, 1]");
  const std::size_t n = pts.n();
  if (n <= 1) return {0.0, 0.0};
  const int d = pts.dim;
  const double full_span = std::sqrt(static_cast<double>(d));
  const double logn = std::log(static_cast<double>(n));
  // Isolation scale: the expected degree at radius R is about n p vol(R).
  double R = d == 2 ? std::sqrt((logn + 2.0) / (static_cast<double>(n) * p * M_PI))
                    : std::cbrt(3.0 * (logn + 2.0) /
                                (4.0 * static_cast<double>(n) * p * M_PI));
  R = std::min(R, full_span);

  std::vector<double> first_edge(n);
  std::vector<CoupledEdge> within;
  for (;;) {
    const bool full = R >= full_span;
    const double r2 = R * R;
    detail::CellGrid grid(pts, R);

    std::fill(first_edge.begin(), first_edge.end(), kInf);
    within.clear();
    const std::size_t n_cells = grid.cell_count();
    for (uint32_t c = 0; c < n_cells; ++c) {
      const auto a = grid.members(c);
      grid.for_each_forward_cell(c, [&](uint32_t nc) {
        const auto b = grid.members(nc);
        const auto consider = [&](uint32_t i, uint32_t j) {
          const double d2 = pts.sq_dist(i, j);
          if (d2 > r2) return;
          if (!pair_retained(seed, stream, i, j, p)) return;
          const double len = std::sqrt(d2);
          first_edge[i] = std::min(first_edge[i], len);
          first_edge[j] = std::min(first_edge[j], len);
          within.push_back({std::min(i, j), std::max(i, j), len, true});
        };
        if (nc == c) {
          for (std::size_t s = 0; s < a.size(); ++s)
            for (std::size_t t = s + 1; t < a.size(); ++t) consider(a[s], a[t]);
        } else {
          for (uint32_t i : a)
            for (uint32_t j : b) consider(i, j);
        }
      });
    }

    double sigma = 0.0;
    for (double v : first_edge) sigma = std::max(sigma, v);

    std::sort(within.begin(), within.end(),
              [](const CoupledEdge& x, const CoupledEdge& y) {
                if (x.length != y.length) return x.length < y.length;
                if (x.i != y.i) return x.i < y.i;
                return x.j < y.j;
              });
    detail::DisjointSet dsu(n);
    double tau = kInf;
    for (const auto& e : within) {
      if (dsu.unite(e.i, e.j) && dsu.component_count() == 1) {
        tau = e.length;
        break;
      }
    }

    if ((std::isfinite(sigma) && std::isfinite(tau)) || full)
      return {sigma, tau};
    R = std::min(2.0 * R, full_span);
  }
}

}  // namespace softgeo
