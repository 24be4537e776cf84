#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "softgeo/connection.hpp"
#include "softgeo/detail/dsu.hpp"
#include "softgeo/points.hpp"
#include "softgeo/rng.hpp"

namespace softgeo {

// Undirected simple graph on vertex set {0, ..., n-1}. Edges are stored with
// i < j and sorted lexicographically, so two graphs compare equal iff they
// have identical edge sets.
struct SoftGraph {
  std::size_t n = 0;
  std::vector<std::pair<uint32_t, uint32_t>> edges;
  std::vector<uint32_t> degrees;

  std::size_t n_edges() const { return edges.size(); }
};

// Exact tests every pair. CellList confines the search to a grid of cells of
// width >= the profile's tail cutoff radius; for a step profile the cutoff
// equals the step radius, so both modes produce the identical graph. For
// profiles with unbounded support, pairs where the connection probability
// falls below tail_eps * mu are skipped.
enum class SamplerMode { Exact, CellList };

struct SamplerOptions {
  SamplerMode mode = SamplerMode::CellList;
  double tail_eps = 1e-12;
};

namespace detail {

// Uniform grid over [0,1]^d with CSR-style cell membership lists.
class CellGrid {
 public:
  CellGrid(const PointSet& pts, double min_width) : dim_(pts.dim) {
    const std::size_t n = pts.n();
    const double by_width =
        min_width >= 1.0 ? 1.0 : std::floor(1.0 / min_width);
    const double by_count =
        std::floor(std::pow(static_cast<double>(n > 0 ? n : 1), 1.0 / dim_));
    m_ = std::max(1, static_cast<int>(std::min(by_width, std::max(1.0, by_count))));
    const std::size_t n_cells = cell_count();
    std::vector<uint32_t> counts(n_cells + 1, 0);
    cell_of_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      cell_of_[i] = cell_index(pts.point(i));
      ++counts[cell_of_[i] + 1];
    }
    for (std::size_t c = 0; c < n_cells; ++c) counts[c + 1] += counts[c];
    start_ = counts;
    order_.resize(n);
    std::vector<uint32_t> cursor(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      order_[cursor[cell_of_[i]]++] = static_cast<uint32_t>(i);
  }

  int cells_per_axis() const { return m_; }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int k = 0; k < dim_; ++k) c *= m_;
    return c;
  }

  uint32_t cell_index(std::span<const double> p) const {
    uint32_t idx = 0;
    for (int k = dim_ - 1; k >= 0; --k)
      idx = idx * m_ + axis_index(p[k]);
    return idx;
  }

  std::span<const uint32_t> members(uint32_t cell) const {
    return {order_.data() + start_[cell],
            static_cast<std::size_t>(start_[cell + 1] - start_[cell])};
  }

  // Visits every cell within Chebyshev distance 1 of the given cell.
  template <typename Visitor>
  void for_each_neighbor_cell(uint32_t cell, Visitor&& visit) const {
    std::array<int, 3> c{};
    decompose(cell, c);
    std::array<int, 3> lo{}, hi{};
    for (int k = 0; k < dim_; ++k) {
      lo[k] = std::max(0, c[k] - 1);
      hi[k] = std::min(m_ - 1, c[k] + 1);
    }
    if (dim_ == 2) {
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x)
          visit(static_cast<uint32_t>(y) * m_ + x);
    } else {
      for (int z = lo[2]; z <= hi[2]; ++z)
        for (int y = lo[1]; y <= hi[1]; ++y)
          for (int x = lo[0]; x <= hi[0]; ++x)
            visit((static_cast<uint32_t>(z) * m_ + y) * m_ + x);
    }
  }

  // Visits the cell itself plus the half of its neighbors that come after it
  // in lexicographic order, so every unordered cell pair is seen once.
  template <typename Visitor>
  void for_each_forward_cell(uint32_t cell, Visitor&& visit) const {
    visit(cell);
    std::array<int, 3> c{};
    decompose(cell, c);
    const auto emit = [&](int dx, int dy, int dz) {
      const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
      if (x < 0 || x >= m_ || y < 0 || y >= m_) return;
      if (dim_ == 3 && (z < 0 || z >= m_)) return;
      uint32_t idx = static_cast<uint32_t>(y) * m_ + x;
      if (dim_ == 3) idx += static_cast<uint32_t>(z) * m_ * m_;
      visit(idx);
    };
    if (dim_ == 2) {
      emit(1, 0, 0);
      emit(-1, 1, 0);
      emit(0, 1, 0);
      emit(1, 1, 0);
    } else {
      emit(1, 0, 0);
      emit(-1, 1, 0);
      emit(0, 1, 0);
      emit(1, 1, 0);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) emit(dx, dy, 1);
    }
  }

  uint32_t cell_of(std::size_t point) const { return cell_of_[point]; }

 private:
  int axis_index(double x) const {
    const int i = static_cast<int>(x * m_);
    return std::clamp(i, 0, m_ - 1);
  }

  void decompose(uint32_t cell, std::array<int, 3>& c) const {
    c[0] = static_cast<int>(cell % m_);
    cell /= m_;
    c[1] = static_cast<int>(cell % m_);
    c[2] = dim_ == 3 ? static_cast<int>(cell / m_) : 0;
  }

  int dim_;
  int m_ = 1;
  std::vector<uint32_t> cell_of_;
  std::vector<uint32_t> order_;
  std::vector<uint32_t> start_;
};

}  // namespace detail

// Samples the graph: each pair (i, j) is kept independently with probability
// phi(x_i - x_j), using a draw keyed by the unordered pair itself. The result
// is therefore a pure function of (points, profile, seed, stream) and does
// not depend on enumeration order or sampler internals.
inline SoftGraph sample_graph(const PointSet& pts, const ConnectionFunction& f,
                              uint64_t seed, uint32_t stream = 0,
                              SamplerOptions opts = {}) {
  if (pts.dim != f.dim())
    throw std::invalid_argument("sample_graph: dimension mismatch");
  const std::size_t n = pts.n();
  SoftGraph g;
  g.n = n;
  g.degrees.assign(n, 0);
  if (n < 2) return g;

  const bool windowed = opts.mode == SamplerMode::CellList;
  const double cutoff = windowed ? f.level_radius(opts.tail_eps) : kInf;
  const double cutoff2 = cutoff * cutoff;

  const auto try_edge = [&](uint32_t i, uint32_t j) {
    const double d2 = pts.sq_dist(i, j);
    if (windowed && d2 > cutoff2) return;
    const double phi = f.radial(std::sqrt(d2));
    if (phi <= 0.0) return;
    if (rng::pair_uniform(seed, rng::Domain::EdgeDraw, stream, i, j) < phi) {
      g.edges.emplace_back(std::min(i, j), std::max(i, j));
      ++g.degrees[i];
      ++g.degrees[j];
    }
  };

  const bool grid_useful = windowed && cutoff < 0.5 && n >= 64;
  if (grid_useful) {
    detail::CellGrid grid(pts, cutoff);
    const std::size_t n_cells = grid.cell_count();
    for (uint32_t c = 0; c < n_cells; ++c) {
      const auto a = grid.members(c);
      grid.for_each_forward_cell(c, [&](uint32_t nc) {
        const auto b = grid.members(nc);
        if (nc == c) {
          for (std::size_t s = 0; s < a.size(); ++s)
            for (std::size_t t = s + 1; t < a.size(); ++t)
              try_edge(a[s], a[t]);
        } else {
          for (uint32_t i : a)
            for (uint32_t j : b) try_edge(i, j);
        }
      });
    }
  } else {
    for (uint32_t i = 0; i + 1 < n; ++i)
      for (uint32_t j = i + 1; j < n; ++j) try_edge(i, j);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

// Number of degree-zero vertices, scanning each vertex's neighborhood only
// until a retained edge shows up. Pair-keyed draws make the result equal to
// the isolated count of the fully sampled graph under the same options.
inline std::size_t count_isolated(const PointSet& pts,
                                  const ConnectionFunction& f, uint64_t seed,
                                  uint32_t stream = 0,
                                  SamplerOptions opts = {}) {
  if (pts.dim != f.dim())
    throw std::invalid_argument("count_isolated: dimension mismatch");
  const std::size_t n = pts.n();
  if (n < 2) return n;

  const bool windowed = opts.mode == SamplerMode::CellList;
  const double cutoff = windowed ? f.level_radius(opts.tail_eps) : kInf;
  const double cutoff2 = cutoff * cutoff;

  const auto has_edge = [&](uint32_t i, uint32_t j) {
    const double d2 = pts.sq_dist(i, j);
    if (windowed && d2 > cutoff2) return false;
    const double phi = f.radial(std::sqrt(d2));
    if (phi <= 0.0) return false;
    return rng::pair_uniform(seed, rng::Domain::EdgeDraw, stream, i, j) < phi;
  };

  std::size_t isolated = 0;
  const bool grid_useful = windowed && cutoff < 0.5 && n >= 64;
  if (grid_useful) {
    detail::CellGrid grid(pts, cutoff);
    for (uint32_t i = 0; i < n; ++i) {
      bool found = false;
      grid.for_each_neighbor_cell(grid.cell_of(i), [&](uint32_t nc) {
        if (found) return;
        for (uint32_t j : grid.members(nc)) {
          if (j != i && has_edge(i, j)) {
            found = true;
            return;
          }
        }
      });
      if (!found) ++isolated;
    }
  } else {
    for (uint32_t i = 0; i < n; ++i) {
      bool found = false;
      for (uint32_t j = 0; j < n && !found; ++j)
        found = j != i && has_edge(i, j);
      if (!found) ++isolated;
    }
  }
  return isolated;
}

// Probability that location y sees at least one point of the set:
// 1 - prod_x (1 - phi(y - x)).
inline double g_value(std::span<const double> y, const PointSet& pts,
                      const ConnectionFunction& f) {
  if (static_cast<int>(y.size()) != pts.dim || pts.dim != f.dim())
    throw std::invalid_argument("g_value: dimension mismatch");
  double prod = 1.0;
  for (std::size_t i = 0; i < pts.n(); ++i) {
    const auto x = pts.point(i);
    double s = 0.0;
    for (int k = 0; k < pts.dim; ++k) {
      const double d = y[k] - x[k];
      s += d * d;
    }
    prod *= 1.0 - f.radial(std::sqrt(s));
    if (prod == 0.0) break;
  }
  return 1.0 - prod;
}

// Probability that the random graph on exactly these points is connected.
// Subset recursion: the component of the lowest-indexed vertex occupies some
// subset T, and no edge crosses from T to the rest; summing those splits and
// subtracting from 1 isolates the fully connected event. O(k 3^k), k <= 12.
inline double h_value(const PointSet& pts, const ConnectionFunction& f) {
  if (pts.dim != f.dim())
    throw std::invalid_argument("h_value: dimension mismatch");
  const int k = static_cast<int>(pts.n());
  if (k == 0) throw std::invalid_argument("h_value: empty point set");
  if (k > 12) throw std::invalid_argument("h_value: supports at most 12 points");
  if (k == 1) return 1.0;

  std::array<std::array<double, 12>, 12> q{};
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double phi = f.radial(std::sqrt(pts.sq_dist(i, j)));
      q[i][j] = q[j][i] = 1.0 - phi;
    }

  const uint32_t full = (1u << k) - 1;
  // row_prod[v][S] = prod_{j in S} (1 - phi_{v j})
  std::vector<double> row_prod(static_cast<std::size_t>(k) << k);
  for (int v = 0; v < k; ++v) {
    double* row = row_prod.data() + (static_cast<std::size_t>(v) << k);
    row[0] = 1.0;
    for (uint32_t s = 1; s <= full; ++s) {
      const uint32_t low = s & (0u - s);
      row[s] = row[s ^ low] * q[v][std::countr_zero(low)];
    }
  }
  const auto no_cross = [&](uint32_t t, uint32_t u) {
    double prod = 1.0;
    for (uint32_t rest = t; rest;) {
      const uint32_t low = rest & (0u - rest);
      prod *= row_prod[(static_cast<std::size_t>(std::countr_zero(low)) << k) | u];
      rest ^= low;
    }
    return prod;
  };

  std::vector<double> conn(full + 1, 0.0);
  for (uint32_t s = 1; s <= full; ++s) {
    if (std::popcount(s) == 1) {
      conn[s] = 1.0;
      continue;
    }
    const uint32_t anchor = s & (0u - s);
    const uint32_t rest = s ^ anchor;
    double split = 0.0;
    for (uint32_t r = rest;; r = (r - 1) & rest) {
      if (r != rest) {
        const uint32_t t = anchor | r;
        split += conn[t] * no_cross(t, s ^ t);
      }
      if (r == 0) break;
    }
    conn[s] = 1.0 - split;
  }
  return conn[full];
}

// Same probability by brute-force enumeration of edge subsets. O(4^(k^2/2)),
// usable up to k = 6; serves as an oracle for the subset recursion.
inline double h_value_enumerated(const PointSet& pts,
                                 const ConnectionFunction& f) {
  const int k = static_cast<int>(pts.n());
  if (k == 0) throw std::invalid_argument("h_value_enumerated: empty point set");
  if (k > 6)
    throw std::invalid_argument("h_value_enumerated: supports at most 6 points");
  if (k == 1) return 1.0;

  std::vector<double> prob;
  std::vector<std::pair<int, int>> pair_of;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      prob.push_back(f.radial(std::sqrt(pts.sq_dist(i, j))));
      pair_of.emplace_back(i, j);
    }
  const int m = static_cast<int>(prob.size());
  double total = 0.0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    double w = 1.0;
    std::array<uint32_t, 6> adj{};
    for (int e = 0; e < m; ++e) {
      if (mask & (1u << e)) {
        w *= prob[e];
        adj[pair_of[e].first] |= 1u << pair_of[e].second;
        adj[pair_of[e].second] |= 1u << pair_of[e].first;
      } else {
        w *= 1.0 - prob[e];
      }
    }
    if (w == 0.0) continue;
    uint32_t seen = 1u, frontier = 1u;
    while (frontier) {
      uint32_t next = 0;
      for (uint32_t rest = frontier; rest;) {
        const uint32_t low = rest & (0u - rest);
        next |= adj[std::countr_zero(low)];
        rest ^= low;
      }
      frontier = next & ~seen;
      seen |= next;
    }
    if (seen == (1u << k) - 1) total += w;
  }
  return total;
}

// One pair of the coupled increasing-radius process: the retention mark is
// drawn once per pair, so the graph at radius r is exactly the step-profile
// sample at that radius with the same seed.
struct CoupledEdge {
  uint32_t i, j;
  double length;
  bool retained;
};

struct CoupledEdgeProcess {
  std::size_t n = 0;
  int dim = 2;
  double p = 1.0;
  double cap = 0.0;  // pairs with length > cap are not stored
  uint64_t seed = 0;
  uint32_t stream = 0;
  std::vector<CoupledEdge> edges;  // sorted by (length, i, j)
};

inline bool pair_retained(uint64_t seed, uint32_t stream, uint32_t i,
                          uint32_t j, double p) {
  return rng::pair_uniform(seed, rng::Domain::EdgeDraw, stream, i, j) < p;
}

// Materializes every pair within the cap, with its retention mark. Memory is
// proportional to the number of such pairs; keep the cap tight for large n
// or use thresholds_fast, which never materializes the process.
inline CoupledEdgeProcess coupled_process(const PointSet& pts, double p,
                                          uint64_t seed, uint32_t stream = 0,
                                          double cap = -1.0) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("coupled_process: p must lie in (0, 1]");
  CoupledEdgeProcess cp;
  cp.n = pts.n();
  cp.dim = pts.dim;
  cp.p = p;
  cp.cap = cap < 0.0 ? std::sqrt(static_cast<double>(pts.dim)) : cap;
  cp.seed = seed;
  cp.stream = stream;
  const double cap2 = cp.cap * cp.cap;

  const auto add_pair = [&](uint32_t i, uint32_t j) {
    const double d2 = pts.sq_dist(i, j);
    if (d2 > cap2) return;
    cp.edges.push_back({std::min(i, j), std::max(i, j), std::sqrt(d2),
                        pair_retained(seed, stream, i, j, p)});
  };

  const std::size_t n = cp.n;
  if (cp.cap < 0.5 && n >= 512) {
    detail::CellGrid grid(pts, cp.cap);
    const std::size_t n_cells = grid.cell_count();
    for (uint32_t c = 0; c < n_cells; ++c) {
      const auto a = grid.members(c);
      grid.for_each_forward_cell(c, [&](uint32_t nc) {
        const auto b = grid.members(nc);
        if (nc == c) {
          for (std::size_t s = 0; s < a.size(); ++s)
            for (std::size_t t = s + 1; t < a.size(); ++t) add_pair(a[s], a[t]);
        } else {
          for (uint32_t i : a)
            for (uint32_t j : b) add_pair(i, j);
        }
      });
    }
  } else {
    for (uint32_t i = 0; i + 1 < n; ++i)
      for (uint32_t j = i + 1; j < n; ++j) add_pair(i, j);
  }
  std::sort(cp.edges.begin(), cp.edges.end(),
            [](const CoupledEdge& a, const CoupledEdge& b) {
              if (a.length != b.length) return a.length < b.length;
              if (a.i != b.i) return a.i < b.i;
              return a.j < b.j;
            });
  return cp;
}

// Graph of retained pairs with length <= r.
inline SoftGraph slice(const CoupledEdgeProcess& cp, double r) {
  SoftGraph g;
  g.n = cp.n;
  g.degrees.assign(cp.n, 0);
  for (const auto& e : cp.edges) {
    if (e.length > r) break;
    if (!e.retained) continue;
    g.edges.emplace_back(e.i, e.j);
    ++g.degrees[e.i];
    ++g.degrees[e.j];
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline void write_edges_csv(const CoupledEdgeProcess& cp,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_edges_csv: cannot open " + path);
  out << "i,j,length,retained\n";
  char buf[32];
  for (const auto& e : cp.edges) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g", e.length);
    out << e.i << ',' << e.j << ',';
    out.write(buf, len);
    out << ',' << (e.retained ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write_edges_csv: write failed for " + path);
}

// Replay import. Accepts our own 4 column format and the plain i,j,length
// variant (every pair counts as retained). n is inferred from the largest
// index unless the caller knows better; pass it when trailing vertices are
// isolated, the file cannot see them.
inline CoupledEdgeProcess read_edges_csv(const std::string& path,
                                         std::size_t n = 0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_edges_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_edges_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_marks;
  if (line == "i,j,length,retained") has_marks = true;
  else if (line == "i,j,length") has_marks = false;
  else throw std::runtime_error("read_edges_csv: unexpected header '" + line + "'");

  CoupledEdgeProcess cp;
  cp.n = n;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    const auto bad = [&]() {
      throw std::runtime_error("read_edges_csv: bad row at line " +
                               std::to_string(lineno) + " in " + path);
    };
    errno = 0;
    const unsigned long long iv = std::strtoull(s, &end, 10);
    if (end == s || *end != ',' || errno) bad();
    s = end + 1;
    const unsigned long long jv = std::strtoull(s, &end, 10);
    if (end == s || *end != ',' || errno) bad();
    s = end + 1;
    const double len = std::strtod(s, &end);
    if (end == s || !(len >= 0.0)) bad();
    bool retained = true;
    if (has_marks) {
      if (*end != ',') bad();
      s = end + 1;
      if (*s == '0' && s[1] == '\0') retained = false;
      else if (*s == '1' && s[1] == '\0') retained = true;
      else bad();
    } else if (*end != '\0') {
      bad();
    }
    if (iv == jv) bad();
    CoupledEdge e;
    e.i = static_cast<uint32_t>(std::min(iv, jv));
    e.j = static_cast<uint32_t>(std::max(iv, jv));
    e.length = len;
    e.retained = retained;
    cp.edges.push_back(e);
    cp.n = std::max(cp.n, static_cast<std::size_t>(e.j) + 1);
    cp.cap = std::max(cp.cap, len);
  }
  if (n > 0 && cp.n > n)
    throw std::runtime_error("read_edges_csv: vertex index beyond n in " + path);
  std::sort(cp.edges.begin(), cp.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.length, a.i, a.j) < std::tie(b.length, b.i, b.j);
  });
  return cp;
}

}  // namespace softgeo
