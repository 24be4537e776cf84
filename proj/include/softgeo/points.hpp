#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softgeo/rng.hpp"

namespace softgeo {

// Flat row-major point store for configurations in the unit square / cube.
struct PointSet {
  int dim = 2;
  std::vector<double> coords;  // size() == n() * dim

  std::size_t n() const { return dim ? coords.size() / dim : 0; }

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  double sq_dist(std::size_t i, std::size_t j) const {
    const double* a = coords.data() + i * dim;
    const double* b = coords.data() + j * dim;
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return s;
  }
};

// n independent uniform points on [0,1]^d. Coordinates come off one counter
// stream, so the prefix of a larger sample equals the smaller sample.
inline PointSet sample_binomial(std::size_t n, int d, uint64_t seed,
                                uint32_t stream = 0) {
  if (d != 2 && d != 3)
    throw std::invalid_argument("sample_binomial: dimension must be 2 or 3");
  PointSet ps;
  ps.dim = d;
  ps.coords.resize(n * d);
  rng::Stream coord_stream(seed, rng::Domain::PointCoords, stream);
  for (double& c : ps.coords) c = coord_stream.next_double();
  return ps;
}

// Poisson process on [0,1]^d with the given intensity: the count is drawn
// from a dedicated counter domain, then coordinates exactly as in the
// binomial sampler.
inline PointSet sample_poisson(double intensity, int d, uint64_t seed,
                               uint32_t stream = 0) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw std::invalid_argument("sample_poisson: intensity must be finite and >= 0");
  rng::Stream count_stream(seed, rng::Domain::PoissonCount, stream);
  const std::size_t n = rng::poisson(count_stream, intensity);
  return sample_binomial(n, d, seed, stream);
}

inline void write_csv(const PointSet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (int k = 0; k < ps.dim; ++k) out << (k ? ",x" : "x") << k;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < ps.n(); ++i) {
    const auto p = ps.point(i);
    for (int k = 0; k < ps.dim; ++k) {
      const int len = std::snprintf(buf, sizeof buf, "%.17g", p[k]);
      if (k) out << ',';
      out.write(buf, len);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

}  // namespace softgeo
