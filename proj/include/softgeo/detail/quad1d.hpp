#pragma once

// Shared 1-D quadrature kernel: composite Gauss-Legendre 8-point panels with
// adaptive halving. A panel is accepted when its value agrees with the sum of
// its two halves; the difference doubles as the error estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace softgeo::detail {

// Gauss-Legendre 8-point abscissas/weights on [-1, 1] (positive half).
inline constexpr double kGL8Node[4] = {
    0.1834346424956498, 0.5255324099163290,
    0.7966664774136267, 0.9602898564975363};
inline constexpr double kGL8Weight[4] = {
    0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

template <typename F>
double gl8(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double dx = half * kGL8Node[q];
    acc += kGL8Weight[q] * (f(mid - dx) + f(mid + dx));
  }
  return acc * half;
}

template <typename F>
double gl8_adaptive_panel(const F& f, double a, double b, double coarse,
                          double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl8(f, a, mid);
  const double right = gl8(f, mid, b);
  const double fine = left + right;
  if (depth <= 0 || std::fabs(fine - coarse) <= abs_tol) return fine;
  return gl8_adaptive_panel(f, a, mid, left, 0.5 * abs_tol, depth - 1) +
         gl8_adaptive_panel(f, mid, b, right, 0.5 * abs_tol, depth - 1);
}

// Integrate f over [a, b], splitting first at the supplied breakpoints
// (integrand kinks), then adaptively within each panel. abs_tol bounds the
// total absolute error target.
template <typename F>
double integrate_adaptive(const F& f, double a, double b,
                          std::vector<double> breakpoints, double abs_tol,
                          int max_depth = 40) {
  if (!(b > a)) return 0.0;
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts;
  for (double t : breakpoints) {
    t = std::clamp(t, a, b);
    if (cuts.empty() || t > cuts.back()) cuts.push_back(t);
  }
  const size_t panels = cuts.size() - 1;
  const double panel_tol = std::max(abs_tol / static_cast<double>(panels), 1e-300);
  double total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (!(hi > lo)) continue;
    const double coarse = gl8(f, lo, hi);
    total += gl8_adaptive_panel(f, lo, hi, coarse, panel_tol, max_depth);
  }
  return total;
}

}  // namespace softgeo::detail
