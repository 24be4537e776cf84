#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "softgeo/connection.hpp"
#include "softgeo/detail/quad1d.hpp"
#include "softgeo/geometry.hpp"

namespace softgeo {

// Poisson: points form a Poisson process of the given intensity, and the
// expected isolated count is intensity * int exp(-intensity V(x)) dx.
// Binomial: exactly n = round(intensity) points, giving n * int (1-V)^(n-1).
enum class Kernel { Poisson, Binomial };

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  Kernel kernel = Kernel::Poisson;
  std::size_t cells = 0;  // leaf cells of the final mesh
};

struct IsolationOptions {
  Kernel kernel = Kernel::Poisson;
  double rel_tol = 1e-8;
  std::size_t cell_budget = 400000;
};

// Thrown when the requested tolerance is not reached within the cell budget.
// Carries the best estimate so far.
class QuadratureBudgetError : public std::runtime_error {
 public:
  explicit QuadratureBudgetError(IntegralResult best)
      : std::runtime_error("quadrature: cell budget exhausted at relative error " +
                           std::to_string(best.value != 0.0
                                              ? best.error_estimate / std::fabs(best.value)
                                              : best.error_estimate)),
        best_(best) {}
  const IntegralResult& best() const { return best_; }

 private:
  IntegralResult best_;
};

// Mean connection measure V(x) = int_[0,1]^d phi(y - x) dy. Step profiles use
// the exact ball-box overlap. Smooth planar profiles integrate the layer-cake
// form mu * int_0^1 area(x, level_radius(u)) du, with u-breakpoints at the
// levels where the growing disk first touches a box side or corner.
inline double local_mean_measure(std::span<const double> x,
                                 const ConnectionFunction& f,
                                 double abs_tol = 1e-12) {
  const int d = f.dim();
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("local_mean_measure: dimension mismatch");
  if (f.kind() == Kind::Step)
    return f.step_probability() * geom::ball_box_volume(x, f.step_radius());
  if (d != 3) {
    const double mu = f.mu();
    std::vector<double> ubreaks;
    const auto add_break = [&](double dist) {
      const double u = f.radial(dist) / mu;
      if (u > 0.0 && u < 1.0) ubreaks.push_back(u);
    };
    const double dx[2] = {x[0], 1.0 - x[0]};
    const double dy[2] = {x[1], 1.0 - x[1]};
    for (double a : dx) add_break(a);
    for (double b : dy) add_break(b);
    for (double a : dx)
      for (double b : dy) add_break(std::sqrt(a * a + b * b));
    for (const auto& k : f.knots()) {
      const double u = k[1] / mu;
      if (u > 0.0 && u < 1.0) ubreaks.push_back(u);
    }
    const auto slice_area = [&](double u) {
      const double rad = f.level_radius(u);
      return geom::disk_box_area(x[0], x[1], rad);
    };
    return mu * detail::integrate_adaptive(slice_area, 0.0, 1.0, ubreaks,
                                           abs_tol / mu);
  }
  throw std::invalid_argument(
      "local_mean_measure: non-step profiles are supported in dimension 2 only");
}

namespace detail {

struct QuadCell {
  std::array<double, 3> lo{}, hi{};
  double value = 0.0;  // refined estimate (sum over 2^d children)
  double error = 0.0;  // |coarse - refined|
  uint64_t seq = 0;
};

struct QuadCellWorse {
  bool operator()(const QuadCell& a, const QuadCell& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.seq > b.seq;  // older cells first on ties
  }
};

// Tensor Gauss-Legendre rule of order 8 per axis over one cell.
template <typename F>
double gl8_tensor(const F& g, const std::array<double, 3>& lo,
                  const std::array<double, 3>& hi, int d) {
  std::array<double, 8> node[3], weight[3];
  double jac = 1.0;
  for (int k = 0; k < d; ++k) {
    const double c = 0.5 * (lo[k] + hi[k]);
    const double h = 0.5 * (hi[k] - lo[k]);
    jac *= h;
    for (int q = 0; q < 4; ++q) {
      node[k][q] = c - h * kGL8Node[3 - q];
      node[k][7 - q] = c + h * kGL8Node[3 - q];
      weight[k][q] = weight[k][7 - q] = kGL8Weight[3 - q];
    }
  }
  double sum = 0.0;
  if (d == 2) {
    double pt[2];
    for (int a = 0; a < 8; ++a) {
      pt[0] = node[0][a];
      double row = 0.0;
      for (int b = 0; b < 8; ++b) {
        pt[1] = node[1][b];
        row += weight[1][b] * g(std::span<const double>(pt, 2));
      }
      sum += weight[0][a] * row;
    }
  } else {
    double pt[3];
    for (int a = 0; a < 8; ++a) {
      pt[0] = node[0][a];
      for (int b = 0; b < 8; ++b) {
        pt[1] = node[1][b];
        double row = 0.0;
        for (int c = 0; c < 8; ++c) {
          pt[2] = node[2][c];
          row += weight[2][c] * g(std::span<const double>(pt, 3));
        }
        sum += weight[0][a] * weight[1][b] * row;
      }
    }
  }
  return jac * sum;
}

template <typename F>
QuadCell make_cell(const F& g, std::array<double, 3> lo,
                   std::array<double, 3> hi, int d, uint64_t seq) {
  QuadCell cell;
  cell.lo = lo;
  cell.hi = hi;
  cell.seq = seq;
  const double coarse = gl8_tensor(g, lo, hi, d);
  double refined = 0.0;
  const int parts = 1 << d;
  for (int m = 0; m < parts; ++m) {
    std::array<double, 3> clo = lo, chi = hi;
    for (int k = 0; k < d; ++k) {
      const double mid = 0.5 * (lo[k] + hi[k]);
      if (m & (1 << k))
        clo[k] = mid;
      else
        chi[k] = mid;
    }
    refined += gl8_tensor(g, clo, chi, d);
  }
  cell.value = refined;
  cell.error = std::fabs(refined - coarse);
  return cell;
}

// Axis grid on [0, 1/2]: geometric grading into the boundary layer of width
// L (where the kernel varies), then a few uniform panels across the interior.
inline std::vector<double> graded_axis(double layer, int geometric_levels) {
  std::vector<double> axis{0.0};
  const double L = std::clamp(layer, 1e-6, 0.5);
  if (L < 0.5) {
    for (int k = geometric_levels; k >= 0; --k)
      axis.push_back(L * std::pow(2.0, -k));
    const int m = std::clamp(static_cast<int>(std::ceil((0.5 - L) / L)), 1, 8);
    for (int i = 1; i <= m; ++i)
      axis.push_back(L + (0.5 - L) * static_cast<double>(i) / m);
  } else {
    for (int i = 1; i <= 8; ++i) axis.push_back(0.5 * i / 8.0);
  }
  return axis;
}

}  // namespace detail

// Expected number of isolated vertices for a point process on [0,1]^d with
// connection profile phi, by adaptive tensor quadrature of the kernel over
// one symmetry quadrant (octant in 3d). Refinement always splits the leaf
// with the largest two-level error estimate.
inline IntegralResult expected_isolated(double intensity,
                                        const ConnectionFunction& f,
                                        IsolationOptions opts = {}) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw std::invalid_argument("expected_isolated: intensity must be finite and >= 0");
  if (!(opts.rel_tol > 0.0))
    throw std::invalid_argument("expected_isolated: rel_tol must be positive");
  IntegralResult res;
  res.kernel = opts.kernel;
  if (intensity == 0.0) return res;

  long long n_binom = 0;
  if (opts.kernel == Kernel::Binomial) {
    n_binom = std::llround(intensity);
    if (n_binom < 1)
      throw std::invalid_argument("expected_isolated: binomial kernel needs n >= 1");
  }

  const int d = f.dim();
  const double span_full = std::sqrt(static_cast<double>(d));

  // A step profile that reaches across the whole box sees V = p everywhere.
  if (f.kind() == Kind::Step && f.step_radius() >= span_full) {
    const double p = f.step_probability();
    if (opts.kernel == Kernel::Poisson)
      res.value = intensity * std::exp(-intensity * p);
    else
      res.value = static_cast<double>(n_binom) *
                  std::exp(static_cast<double>(n_binom - 1) * std::log1p(-p));
    return res;
  }

  const double v_tol =
      std::max(0.25 * opts.rel_tol / std::max(intensity, 1.0), 1e-16);
  const auto kernel_at = [&](std::span<const double> x) {
    const double v = local_mean_measure(x, f, v_tol);
    if (opts.kernel == Kernel::Poisson) return std::exp(-intensity * v);
    if (n_binom == 1) return 1.0;
    if (v >= 1.0) return 0.0;
    return std::exp(static_cast<double>(n_binom - 1) * std::log1p(-v));
  };

  const double layer = std::min(f.level_radius(1e-6), 0.5);
  const auto axis = detail::graded_axis(layer, d == 2 ? 12 : 7);

  std::priority_queue<detail::QuadCell, std::vector<detail::QuadCell>,
                      detail::QuadCellWorse>
      heap;
  uint64_t seq = 0;
  double total = 0.0, total_err = 0.0;
  std::size_t leaves = 0;

  const auto push_cell = [&](std::array<double, 3> lo, std::array<double, 3> hi) {
    auto cell = detail::make_cell(kernel_at, lo, hi, d, seq++);
    total += cell.value;
    total_err += cell.error;
    ++leaves;
    heap.push(std::move(cell));
  };

  const std::size_t na = axis.size() - 1;
  if (d == 2) {
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < na; ++j)
        push_cell({axis[i], axis[j], 0.0}, {axis[i + 1], axis[j + 1], 0.0});
  } else {
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < na; ++j)
        for (std::size_t k = 0; k < na; ++k)
          push_cell({axis[i], axis[j], axis[k]},
                    {axis[i + 1], axis[j + 1], axis[k + 1]});
  }

  const double mirror = std::pow(2.0, d);
  const auto current = [&]() {
    IntegralResult r;
    r.kernel = opts.kernel;
    r.value = intensity * mirror * total;
    r.error_estimate = intensity * mirror * total_err;
    r.cells = leaves;
    return r;
  };

  while (total_err > 0.5 * opts.rel_tol * std::fabs(total)) {
    if (leaves + (1u << d) > opts.cell_budget)
      throw QuadratureBudgetError(current());
    const auto worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    --leaves;
    const int parts = 1 << d;
    for (int m = 0; m < parts; ++m) {
      std::array<double, 3> clo = worst.lo, chi = worst.hi;
      for (int k = 0; k < d; ++k) {
        const double mid = 0.5 * (worst.lo[k] + worst.hi[k]);
        if (m & (1 << k))
          clo[k] = mid;
        else
          chi[k] = mid;
      }
      push_cell(clo, chi);
    }
  }
  return current();
}

// First-order split of the expected isolated count into interior, side, and
// corner contributions, in terms of the profile's scale descriptors. Valid
// for planar profiles; a_n = n rho_eta^2 mu is the boundary occupation number.
struct BoundaryDecomposition {
  double interior = 0.0;
  double side = 0.0;
  double corner = 0.0;
  double total = 0.0;
  double a_n = 0.0;
  double nI = 0.0;
};

inline BoundaryDecomposition boundary_decomposition(double n,
                                                    const ConnectionFunction& f) {
  if (f.dim() != 2)
    throw std::invalid_argument("boundary_decomposition: planar profiles only");
  const ShapeDescriptor sd = shape_integrals(f);
  BoundaryDecomposition bd;
  bd.a_n = n * sd.rho_eta * sd.rho_eta * sd.mu;
  bd.nI = n * sd.I;
  bd.interior = n * std::exp(-bd.nI);
  bd.side = (2.0 / sd.J1) * std::sqrt(n / (bd.a_n * sd.mu)) *
            std::exp(-0.5 * bd.nI);
  bd.corner = 4.0 * std::exp(-0.25 * bd.nI) / (bd.a_n * sd.mu * sd.J1 * sd.J1);
  bd.total = bd.interior + bd.side + bd.corner;
  return bd;
}

}  // namespace softgeo
