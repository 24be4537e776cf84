#pragma once

// Exact and semi-numeric intersection volumes between a ball and the unit
// box. The planar case decomposes the disk against the four box edges via
// quadrant areas (inclusion-exclusion of the 2-D "CDF" of the disk); the
// 3-D case integrates planar slices along one axis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace softgeo::geom {

namespace detail {

// Antiderivative of sqrt(R^2 - t^2) on [0, x], clamped to the disk.
inline double arc_integral(double x, double R) {
  x = std::clamp(x, 0.0, R);
  const double s = std::sqrt(std::max(R * R - x * x, 0.0));
  return 0.5 * (x * s + R * R * std::asin(std::clamp(x / R, -1.0, 1.0)));
}

// Area of disk(origin, R) cut to the quadrant {x >= X, y >= Y}. Negative
// offsets reduce to nonnegative ones by reflecting half-planes, which keeps
// every code path a single closed form.
inline double corner_area(double X, double Y, double R) {
  if (X >= R || Y >= R) return 0.0;
  X = std::max(X, -R);
  Y = std::max(Y, -R);
  if (X < 0.0) return 2.0 * corner_area(0.0, Y, R) - corner_area(-X, Y, R);
  if (Y < 0.0) return 2.0 * corner_area(X, 0.0, R) - corner_area(X, -Y, R);
  if (X * X + Y * Y >= R * R) return 0.0;
  const double xmax = std::sqrt(R * R - Y * Y);
  return arc_integral(xmax, R) - arc_integral(X, R) - Y * (xmax - X);
}

}  // namespace detail

// Area of the circular segment beyond a chord at distance t from the center.
inline double circular_segment(double t, double R) {
  if (t >= R) return 0.0;
  t = std::max(t, 0.0);
  return R * R * std::acos(std::clamp(t / R, 0.0, 1.0)) -
         t * std::sqrt(std::max(R * R - t * t, 0.0));
}

// Exact area of disk((cx, cy), R) ∩ [0,1]^2.
inline double disk_box_area(double cx, double cy, double R) {
  if (!(R >= 0.0)) throw std::invalid_argument("disk_box_area: R must be >= 0");
  if (R == 0.0) return 0.0;
  // A disk holding the farthest corner holds the whole box; skip the
  // inclusion-exclusion and its cancellation noise.
  const double ex = std::max(cx * cx, (1.0 - cx) * (1.0 - cx));
  const double ey = std::max(cy * cy, (1.0 - cy) * (1.0 - cy));
  if (R * R >= ex + ey) return 1.0;
  // Quadrant areas at the four box corners, taken relative to the center.
  const double a = -cx, b = 1.0 - cx;
  const double c = -cy, d = 1.0 - cy;
  const double area = detail::corner_area(a, c, R) - detail::corner_area(b, c, R) -
                      detail::corner_area(a, d, R) + detail::corner_area(b, d, R);
  return std::clamp(area, 0.0, std::min(1.0, M_PI * R * R));
}

namespace detail {

// Adaptive Simpson on [a, b]; the slice integrands below are C^1 with
// isolated square-root kinks, which this handles to the requested tolerance.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

// Volume of ball((cx, cy, cz), R) ∩ [0,1]^3, by integrating exact planar
// slice areas along z. No closed form exists once the ball meets three
// mutually orthogonal faces, so the last dimension is numeric.
inline double ball_box_volume_3d(double cx, double cy, double cz, double R,
                                 double rel_tol = 1e-11) {
  if (!(R >= 0.0)) throw std::invalid_argument("ball_box_volume_3d: R must be >= 0");
  if (R == 0.0) return 0.0;
  const double ex = std::max(cx * cx, (1.0 - cx) * (1.0 - cx));
  const double ey = std::max(cy * cy, (1.0 - cy) * (1.0 - cy));
  const double ez = std::max(cz * cz, (1.0 - cz) * (1.0 - cz));
  if (R * R >= ex + ey + ez) return 1.0;
  const double lo = std::max(0.0, cz - R);
  const double hi = std::min(1.0, cz + R);
  if (!(hi > lo)) return 0.0;
  const auto slice = [&](double z) {
    const double dz = z - cz;
    const double rr = R * R - dz * dz;
    if (rr <= 0.0) return 0.0;
    return disk_box_area(cx, cy, std::sqrt(rr));
  };
  const double scale = std::min(1.0, (4.0 / 3.0) * M_PI * R * R * R);
  const double tol = std::max(rel_tol * scale, 1e-300);
  const double vol = detail::integrate_simpson(slice, lo, hi, tol);
  return std::clamp(vol, 0.0, std::min(1.0, (4.0 / 3.0) * M_PI * R * R * R));
}

// Dimension-dispatching entry point; center.size() must be 2 or 3.
inline double ball_box_volume(std::span<const double> center, double R) {
  switch (center.size()) {
    case 2:
      return disk_box_area(center[0], center[1], R);
    case 3:
      return ball_box_volume_3d(center[0], center[1], center[2], R);
    default:
      throw std::invalid_argument("ball_box_volume: dimension must be 2 or 3");
  }
}

}  // namespace softgeo::geom
