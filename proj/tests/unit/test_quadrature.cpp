#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "softgeo/quadrature.hpp"

using namespace softgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent route for the planar mean measure of a gaussian-type profile:
// the box integral factorizes into products of erf differences.
double gaussian_measure(double x, double y, double scale) {
  const double s = 0.5 * std::sqrt(M_PI) * scale;
  const double fx = std::erf((1.0 - x) / scale) + std::erf(x / scale);
  const double fy = std::erf((1.0 - y) / scale) + std::erf(y / scale);
  return s * fx * s * fy;
}

// Independent route for step-profile isolation integrals: nested adaptive
// Simpson over the box, split at the lines where the disk starts clipping.
template <typename Kern>
double simpson_reference(double r, const Kern& kern) {
  const std::array<double, 4> cuts = {0.0, r, 1.0 - r, 1.0};
  const auto inner = [&](double y) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k)
      acc += geom::detail::integrate_simpson(
          [&](double x) { return kern(geom::disk_box_area(x, y, r)); },
          cuts[k], cuts[k + 1], 1e-12);
    return acc;
  };
  double acc = 0.0;
  for (int k = 0; k < 3; ++k)
    acc += geom::detail::integrate_simpson(inner, cuts[k], cuts[k + 1], 1e-11);
  return acc;
}

}  // namespace

TEST_CASE("mean measure of a step profile is the exact overlap") {
  const auto f = ConnectionFunction::step(0.17, 0.45);
  const std::array<std::array<double, 2>, 4> xs = {{
      {0.5, 0.5}, {0.05, 0.3}, {0.0, 0.0}, {0.99, 0.5},
  }};
  for (const auto& x : xs) {
    CHECK_THAT(local_mean_measure(x, f),
               WithinRel(0.45 * geom::disk_box_area(x[0], x[1], 0.17), 1e-14));
  }
  const auto f3 = ConnectionFunction::step(0.2, 0.8, 3);
  const std::array<double, 3> x3 = {0.1, 0.5, 0.9};
  CHECK_THAT(local_mean_measure(x3, f3),
             WithinRel(0.8 * geom::ball_box_volume_3d(0.1, 0.5, 0.9, 0.2),
                       1e-11));
}

TEST_CASE("mean measure of a gaussian profile matches the erf product") {
  const double beta = 1.3, rho = 0.1;
  const auto f = ConnectionFunction::rayleigh(beta, 2.0, rho);
  const double scale = rho / std::sqrt(beta);
  const std::array<std::array<double, 2>, 4> xs = {{
      {0.5, 0.5}, {0.02, 0.4}, {0.0, 0.0}, {0.85, 0.97},
  }};
  for (const auto& x : xs) {
    CHECK_THAT(local_mean_measure(x, f, 1e-14),
               WithinRel(gaussian_measure(x[0], x[1], scale), 1e-9));
  }
}

TEST_CASE("mean measure of a conical profile at an interior point") {
  // phi(t) = 1 - t/R inside radius R; fully contained disk integrates to
  // pi R^2 / 3
  const double R = 0.2;
  const auto f = ConnectionFunction::custom_radial({{0.0, 1.0}, {R, 0.0}});
  const std::array<double, 2> mid = {0.5, 0.5};
  CHECK_THAT(local_mean_measure(mid, f, 1e-14),
             WithinRel(M_PI * R * R / 3.0, 1e-10));
}

TEST_CASE("mean measure input validation") {
  const auto ray3 = ConnectionFunction::rayleigh(1.0, 2.0, 0.1, 3);
  const std::array<double, 3> x3 = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(local_mean_measure(x3, ray3), std::invalid_argument);
  const auto f = ConnectionFunction::step(0.1, 0.5);
  CHECK_THROWS_AS(local_mean_measure(x3, f), std::invalid_argument);
}

TEST_CASE("covering step profiles short circuit to closed forms") {
  const auto f = ConnectionFunction::step(2.0, 0.1);
  const auto pois = expected_isolated(50.0, f);
  CHECK(pois.value == 50.0 * std::exp(-5.0));
  CHECK(pois.cells == 0);

  IsolationOptions bopts;
  bopts.kernel = Kernel::Binomial;
  const auto bin = expected_isolated(100.0, f, bopts);
  CHECK_THAT(bin.value, WithinRel(100.0 * std::pow(0.9, 99.0), 1e-13));

  const auto f3 = ConnectionFunction::step(1.8, 0.25, 3);
  CHECK(expected_isolated(40.0, f3).value == 40.0 * std::exp(-10.0));

  // one binomial point is always isolated
  const auto single = expected_isolated(1.0, ConnectionFunction::step(0.1, 0.9),
                                        bopts);
  CHECK_THAT(single.value, WithinRel(1.0, 1e-9));
}

TEST_CASE("step isolation integral against a nested simpson reference") {
  const auto f = ConnectionFunction::step(0.1, 0.5);
  IsolationOptions opts;
  opts.rel_tol = 1e-8;
  const double lambda = 100.0;
  const auto got = expected_isolated(lambda, f, opts);
  const double ref = lambda * simpson_reference(0.1, [&](double a) {
    return std::exp(-lambda * 0.5 * a);
  });
  CHECK_THAT(got.value, WithinRel(ref, 2e-6));
  CHECK(got.cells > 0);
  CHECK(got.error_estimate <= opts.rel_tol * got.value * 1.000001);

  IsolationOptions bopts;
  bopts.kernel = Kernel::Binomial;
  bopts.rel_tol = 1e-8;
  const auto bgot = expected_isolated(100.0, f, bopts);
  const double bref = 100.0 * simpson_reference(0.1, [&](double a) {
    return std::pow(1.0 - 0.5 * a, 99.0);
  });
  CHECK_THAT(bgot.value, WithinRel(bref, 2e-6));
  CHECK(bgot.kernel == Kernel::Binomial);
}

TEST_CASE("gaussian isolation integral against an external reference") {
  // reference computed from the closed-form erf-product measure with an
  // independent high order integrator, correct to 3e-10
  const auto f = ConnectionFunction::rayleigh(1.0, 2.0, 0.07779396613973207);
  IsolationOptions opts;
  opts.rel_tol = 1e-8;
  const auto got = expected_isolated(300.0, f, opts);
  CHECK_THAT(got.value, WithinRel(2.6625743497152854, 5e-7));
}

TEST_CASE("cell budget failure carries the best estimate") {
  const auto f = ConnectionFunction::step(0.1, 0.5);
  IsolationOptions opts;
  opts.rel_tol = 1e-13;
  opts.cell_budget = 500;
  bool threw = false;
  try {
    expected_isolated(100.0, f, opts);
  } catch (const QuadratureBudgetError& e) {
    threw = true;
    CHECK(e.best().cells <= 500);
    CHECK(e.best().cells > 0);
    const double ref = 100.0 * simpson_reference(0.1, [&](double a) {
      return std::exp(-100.0 * 0.5 * a);
    });
    CHECK_THAT(e.best().value, WithinRel(ref, 1e-3));
  }
  CHECK(threw);
}

TEST_CASE("isolation integral input validation") {
  const auto f = ConnectionFunction::step(0.1, 0.5);
  CHECK(expected_isolated(0.0, f).value == 0.0);
  CHECK_THROWS_AS(expected_isolated(-3.0, f), std::invalid_argument);
  IsolationOptions opts;
  opts.rel_tol = 0.0;
  CHECK_THROWS_AS(expected_isolated(10.0, f, opts), std::invalid_argument);
  IsolationOptions bopts;
  bopts.kernel = Kernel::Binomial;
  CHECK_THROWS_AS(expected_isolated(0.4, f, bopts), std::invalid_argument);
}

TEST_CASE("boundary decomposition in the bulk dominated scaling") {
  const double n = 1e6;
  const double r = 0.0020970487818066054;  // n pi r^2 = log n
  const auto f = ConnectionFunction::step(r, 1.0);
  const auto bd = boundary_decomposition(n, f);
  const double logn = std::log(n);
  CHECK_THAT(bd.nI, WithinRel(logn, 1e-12));
  CHECK_THAT(bd.a_n, WithinRel(logn / M_PI, 1e-12));
  CHECK_THAT(bd.interior, WithinRel(1.0, 1e-10));
  CHECK_THAT(bd.side, WithinRel(2.0 * std::sqrt(M_PI / logn), 1e-10));
  CHECK_THAT(bd.corner,
             WithinRel(4.0 * M_PI / (logn * std::pow(n, 0.25)), 1e-10));
  CHECK_THAT(bd.total, WithinRel(bd.interior + bd.side + bd.corner, 1e-14));
}

TEST_CASE("boundary decomposition in a side dominated scaling") {
  const double n = 1e6;
  const auto f = ConnectionFunction::step(0.023961943280623576, 0.01);
  const auto bd = boundary_decomposition(n, f);
  CHECK_THAT(bd.nI, WithinRel(18.038231003993868, 1e-12));
  CHECK_THAT(bd.interior, WithinRel(0.014659, 2e-4));
  CHECK_THAT(bd.side, WithinRel(1.010545, 2e-4));
  CHECK_THAT(bd.corner, WithinRel(0.766549, 2e-4));

  const auto f3 = ConnectionFunction::step(0.1, 1.0, 3);
  CHECK_THROWS_AS(boundary_decomposition(1e5, f3), std::invalid_argument);
}
