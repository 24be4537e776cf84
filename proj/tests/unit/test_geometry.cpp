#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "softgeo/geometry.hpp"

using namespace softgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("circular segment closed forms") {
  CHECK_THAT(geom::circular_segment(0.0, 1.0), WithinRel(M_PI / 2.0, 1e-14));
  CHECK_THAT(geom::circular_segment(0.5, 1.0),
             WithinRel(M_PI / 3.0 - std::sqrt(3.0) / 4.0, 1e-14));
  CHECK(geom::circular_segment(1.0, 1.0) == 0.0);
  CHECK(geom::circular_segment(2.0, 1.0) == 0.0);
  // negative chord distance clamps to the half disk
  CHECK_THAT(geom::circular_segment(-0.3, 1.0), WithinRel(M_PI / 2.0, 1e-14));
}

TEST_CASE("disk box area symmetric reference cases") {
  const double R = 0.3;
  // fully inside
  CHECK_THAT(geom::disk_box_area(0.5, 0.5, 0.2),
             WithinRel(M_PI * 0.04, 1e-13));
  // centered on one edge: half disk
  CHECK_THAT(geom::disk_box_area(0.0, 0.5, R),
             WithinRel(M_PI * R * R / 2.0, 1e-13));
  // centered on a corner: quarter disk
  CHECK_THAT(geom::disk_box_area(0.0, 0.0, 0.4),
             WithinRel(M_PI * 0.16 / 4.0, 1e-13));
  // covering and disjoint
  CHECK(geom::disk_box_area(0.5, 0.5, 2.0) == 1.0);
  CHECK(geom::disk_box_area(3.0, 3.0, 1.0) == 0.0);
  CHECK(geom::disk_box_area(0.2, 0.7, 0.0) == 0.0);
}

TEST_CASE("disk box area single edge overlap equals disk minus segment") {
  // center near the left edge only; everything else is interior
  const double got = geom::disk_box_area(0.05, 0.5, 0.1);
  const double expect = M_PI * 0.01 - geom::circular_segment(0.05, 0.1);
  CHECK_THAT(got, WithinRel(expect, 1e-13));
  CHECK_THAT(got, WithinRel(0.02527407804285415, 1e-13));
}

TEST_CASE("disk box area respects box symmetries") {
  const std::array<std::array<double, 3>, 5> cases = {{
      {0.1, 0.2, 0.35},
      {-0.05, 0.5, 0.4},
      {0.9, 0.95, 0.2},
      {0.5, 1.1, 0.6},
      {0.25, 0.25, 1.2},
  }};
  for (const auto& c : cases) {
    const double base = geom::disk_box_area(c[0], c[1], c[2]);
    CHECK_THAT(geom::disk_box_area(1.0 - c[0], c[1], c[2]),
               WithinAbs(base, 1e-13));
    CHECK_THAT(geom::disk_box_area(c[0], 1.0 - c[1], c[2]),
               WithinAbs(base, 1e-13));
    CHECK_THAT(geom::disk_box_area(c[1], c[0], c[2]), WithinAbs(base, 1e-13));
  }
}

TEST_CASE("disk box area grows with radius and stays within bounds") {
  double prev = 0.0;
  for (int k = 1; k <= 60; ++k) {
    const double R = 0.025 * k;
    const double a = geom::disk_box_area(0.15, 0.85, R);
    CHECK(a >= prev - 1e-15);
    CHECK(a <= std::min(1.0, M_PI * R * R) + 1e-15);
    prev = a;
  }
  CHECK_THROWS_AS(geom::disk_box_area(0.5, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("ball box volume closed form anchors") {
  const double R = 0.2;
  CHECK_THAT(geom::ball_box_volume_3d(0.5, 0.5, 0.5, R),
             WithinRel(4.0 / 3.0 * M_PI * R * R * R, 1e-9));
  // face center: half ball
  CHECK_THAT(geom::ball_box_volume_3d(0.0, 0.5, 0.5, 0.3),
             WithinRel(2.0 / 3.0 * M_PI * 0.027, 1e-9));
  // edge midpoint: quarter ball
  CHECK_THAT(geom::ball_box_volume_3d(0.0, 0.0, 0.5, 0.3),
             WithinRel(1.0 / 3.0 * M_PI * 0.027, 1e-9));
  // corner: eighth
  CHECK_THAT(geom::ball_box_volume_3d(0.0, 0.0, 0.0, 0.4),
             WithinRel(1.0 / 6.0 * M_PI * 0.064, 1e-9));
  CHECK(geom::ball_box_volume_3d(0.5, 0.5, 0.5, 2.0) == 1.0);
  CHECK(geom::ball_box_volume_3d(4.0, 0.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("ball box volume slice consistency") {
  // big ball clipped by one face pair: volume equals the 1-D integral of
  // full-disk slices, which has a closed form (spherical cap difference)
  const double R = 0.45, cz = 0.3;
  const auto cap = [&](double h) {
    // volume of the cap of height h of a ball of radius R
    return M_PI * h * h * (R - h / 3.0);
  };
  const double full = 4.0 / 3.0 * M_PI * R * R * R;
  const double expect = full - cap(R - cz);  // only the z=0 face cuts
  CHECK_THAT(geom::ball_box_volume_3d(0.5, 0.5, cz, R), WithinRel(expect, 1e-9));
}

TEST_CASE("ball box volume dispatch by dimension") {
  const std::array<double, 2> c2 = {0.3, 0.4};
  const std::array<double, 3> c3 = {0.3, 0.4, 0.5};
  CHECK(geom::ball_box_volume(c2, 0.25) == geom::disk_box_area(0.3, 0.4, 0.25));
  CHECK_THAT(geom::ball_box_volume(c3, 0.25),
             WithinRel(geom::ball_box_volume_3d(0.3, 0.4, 0.5, 0.25), 1e-12));
  const std::array<double, 4> c4 = {0.1, 0.2, 0.3, 0.4};
  CHECK_THROWS_AS(geom::ball_box_volume(c4, 0.2), std::invalid_argument);
}
