#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "softgeo/connection.hpp"

using namespace softgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("factories reject malformed parameters") {
  CHECK_THROWS_AS(ConnectionFunction::step(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::step(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::step(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::step(0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::step(0.1, 0.5, 4), std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::step(0.1, 0.5, 2, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::rayleigh(-1.0, 2.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::rayleigh(1.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConnectionFunction::rayleigh(1.0, 2.0, -0.5),
                  std::invalid_argument);

  using Knots = std::vector<std::array<double, 2>>;
  CHECK_THROWS_AS(ConnectionFunction::custom_radial(Knots{{0.0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      ConnectionFunction::custom_radial(Knots{{0.1, 1.0}, {0.5, 0.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ConnectionFunction::custom_radial(Knots{{0.0, 0.0}, {0.5, 0.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ConnectionFunction::custom_radial(Knots{{0.0, 1.2}, {0.5, 0.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ConnectionFunction::custom_radial(Knots{{0.0, 1.0}, {0.5, 0.8}, {0.4, 0.0}}),
      std::invalid_argument);
  // an annulus-like bump is not a valid profile
  CHECK_THROWS_AS(
      ConnectionFunction::custom_radial(Knots{{0.0, 0.2}, {0.3, 0.9}, {0.6, 0.0}}),
      std::invalid_argument);
}

TEST_CASE("radial evaluation per kind") {
  const auto st = ConnectionFunction::step(0.25, 0.6);
  CHECK(st.radial(0.0) == 0.6);
  CHECK(st.radial(0.25) == 0.6);  // boundary included
  CHECK(st.radial(0.2500001) == 0.0);
  CHECK(st.mu() == 0.6);

  const auto ray = ConnectionFunction::rayleigh(2.0, 1.5, 0.3);
  CHECK_THAT(ray.radial(0.3), WithinRel(std::exp(-2.0), 1e-14));
  CHECK_THAT(ray.radial(0.6),
             WithinRel(std::exp(-2.0 * std::pow(2.0, 1.5)), 1e-14));
  CHECK(ray.mu() == 1.0);

  const auto pl = ConnectionFunction::custom_radial(
      {{0.0, 0.8}, {0.5, 0.8}, {1.0, 0.0}});
  CHECK(pl.radial(0.2) == 0.8);
  CHECK_THAT(pl.radial(0.75), WithinRel(0.4, 1e-14));
  CHECK(pl.radial(1.0) == 0.0);
  CHECK(pl.radial(5.0) == 0.0);
  CHECK(pl.mu() == 0.8);

  const std::array<double, 2> disp = {0.3, 0.4};  // norm 0.5
  CHECK(st.eval(disp) == st.radial(0.5));
  CHECK(ray.eval(disp) == ray.radial(0.5));
  const std::array<double, 3> bad = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(st.eval(bad), std::invalid_argument);
}

TEST_CASE("level radius closed forms and bisection") {
  const auto st = ConnectionFunction::step(0.25, 0.6);
  CHECK(st.level_radius(1.0) == 0.25);
  CHECK(st.level_radius(0.01) == 0.25);

  const auto ray = ConnectionFunction::rayleigh(1.0, 2.0, 1.0);
  CHECK(ray.level_radius(1.0) == 0.0);
  CHECK_THAT(ray.level_radius(0.01),
             WithinRel(2.1459660262893476, 1e-14));  // sqrt(log 100)
  CHECK_THAT(ray.level_radius(std::exp(-1.0)), WithinRel(1.0, 1e-14));

  const auto pl = ConnectionFunction::custom_radial(
      {{0.0, 0.8}, {0.5, 0.8}, {1.0, 0.0}});
  CHECK_THAT(pl.level_radius(1.0), WithinRel(0.5, 1e-12));
  CHECK_THAT(pl.level_radius(0.5), WithinRel(0.75, 1e-12));
  // profile never drops below a level it ends above
  const auto tail = ConnectionFunction::custom_radial({{0.0, 1.0}, {1.0, 0.5}});
  CHECK(std::isinf(tail.level_radius(0.25)));

  CHECK_THROWS_AS(st.level_radius(0.0), std::invalid_argument);
  CHECK_THROWS_AS(st.level_radius(1.5), std::invalid_argument);
}

TEST_CASE("support radius") {
  CHECK(ConnectionFunction::step(0.25, 0.6).rho0() == 0.25);
  CHECK(std::isinf(ConnectionFunction::rayleigh(1.0, 2.0, 1.0).rho0()));
  CHECK(ConnectionFunction::custom_radial({{0.0, 1.0}, {0.7, 0.0}, {2.0, 0.0}})
            .rho0() == 0.7);
  CHECK(std::isinf(
      ConnectionFunction::custom_radial({{0.0, 1.0}, {1.0, 0.5}}).rho0()));
}

TEST_CASE("shape integrals for step and rayleigh") {
  const auto st = ConnectionFunction::step(0.1, 0.5);
  const auto s = shape_integrals(st);
  CHECK_THAT(s.I, WithinRel(0.5 * M_PI * 0.01, 1e-12));
  CHECK_THAT(s.J1, WithinRel(1.0, 1e-12));
  CHECK_THAT(s.J2, WithinRel(M_PI, 1e-12));
  CHECK(s.rho_eta == 0.1);
  CHECK(s.rho0 == 0.1);
  CHECK(s.mu == 0.5);

  const auto ray = ConnectionFunction::rayleigh(1.0, 2.0, 1.0);
  const auto r = shape_integrals(ray);
  CHECK_THAT(r.I, WithinRel(M_PI, 1e-12));
  CHECK_THAT(r.J1, WithinRel(std::sqrt(M_PI) / 2.0, 1e-13));
  CHECK_THAT(r.J2, WithinRel(M_PI, 1e-13));
  CHECK_THAT(r.rho_eta, WithinRel(1.0, 1e-14));

  // scaling: I is quadratic in rho for a planar profile
  const auto ray2 = ConnectionFunction::rayleigh(1.0, 2.0, 0.05);
  CHECK_THAT(shape_integrals(ray2).I, WithinRel(M_PI * 0.0025, 1e-12));

  // 3-D step
  const auto st3 = ConnectionFunction::step(0.2, 0.7, 3);
  CHECK_THAT(shape_integrals(st3).I,
             WithinRel(0.7 * 4.0 / 3.0 * M_PI * 0.008, 1e-12));
}

TEST_CASE("planar identity I equals mu rho^2 J2") {
  const std::vector<ConnectionFunction> fs = {
      ConnectionFunction::step(0.37, 0.81),
      ConnectionFunction::rayleigh(0.7, 1.3, 0.4),
      ConnectionFunction::custom_radial({{0.0, 0.9}, {0.2, 0.6}, {0.8, 0.0}}),
      ConnectionFunction::custom_radial(
          {{0.0, 1.0}, {0.1, 1.0}, {0.3, 0.25}, {0.5, 0.25}, {1.1, 0.0}},
          2, 0.25),
  };
  for (const auto& f : fs) {
    const auto s = shape_integrals(f);
    CHECK_THAT(s.I, WithinRel(s.mu * s.rho_eta * s.rho_eta * s.J2, 1e-10));
  }
}

TEST_CASE("envelope normalizer matches its gamma function form") {
  CHECK_THAT(k_eta(1.0, 2), WithinRel(6.0 * M_PI, 1e-12));
  CHECK_THAT(k_eta(1.0, 3), WithinRel(24.0 * M_PI, 1e-12));
  CHECK_THAT(k_eta(0.5, 2), WithinRel(2304.0 * M_PI, 1e-11));
  // generic eta against the closed form (3/eta) S_{d-1} Gamma(d/eta) / (eta^{1+d/eta})
  const double eta = 0.8;
  const double expect2 = (3.0 / eta) * 2.0 * M_PI * std::tgamma(2.0 / eta) /
                         (eta * std::pow(eta, 2.0 / eta));
  CHECK_THAT(k_eta(eta, 2), WithinRel(expect2, 1e-11));
  CHECK_THROWS_AS(k_eta(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(k_eta(1.2, 2), std::invalid_argument);
  CHECK_THROWS_AS(k_eta(0.5, 4), std::invalid_argument);
}

TEST_CASE("class membership checks") {
  const auto st = ConnectionFunction::step(0.2, 0.5);
  const auto rs = validate_class(st, 1.0);
  CHECK(rs.in_envelope_class);
  CHECK(rs.in_compact_class);
  CHECK(rs.envelope_margin <= 1.0 + 1e-12);

  const auto ray = ConnectionFunction::rayleigh(1.0, 2.0, 1.0);
  // at eta = 1 the level radius degenerates to 0 (profile value is mu only at
  // the origin), so membership starts at eta = 1/2
  const auto r1 = validate_class(ray, 1.0);
  CHECK_FALSE(r1.level_radius_ok);
  CHECK_FALSE(r1.in_envelope_class);
  const auto r5 = validate_class(ray, 0.5);
  CHECK(r5.in_envelope_class);
  CHECK_FALSE(r5.in_compact_class);  // unbounded support
  CHECK(find_envelope_eta(ray) == 0.5);
  CHECK(find_envelope_eta(st) == 1.0);

  CHECK_THROWS_AS(validate_class(st, 0.0), std::invalid_argument);
}

TEST_CASE("json round trips") {
  const auto st = ConnectionFunction::step(0.125, 0.75, 3, 0.5);
  json js = st;
  CHECK(js.at("kind") == "step");
  CHECK(js.at("d") == 3);
  CHECK(js.at("params").at("r") == 0.125);
  const auto st2 = js.get<ConnectionFunction>();
  CHECK(st2.kind() == Kind::Step);
  CHECK(st2.dim() == 3);
  CHECK(st2.eta() == 0.5);
  CHECK(st2.step_radius() == 0.125);
  CHECK(st2.step_probability() == 0.75);

  const auto ray = ConnectionFunction::rayleigh(1.5, 2.5, 0.07);
  const auto ray2 = json(ray).get<ConnectionFunction>();
  CHECK(ray2.rayleigh_beta() == 1.5);
  CHECK(ray2.rayleigh_gamma() == 2.5);
  CHECK(ray2.rayleigh_rho() == 0.07);
  CHECK(ray2.eta() == std::exp(-1.0));

  const auto pl = ConnectionFunction::custom_radial(
      {{0.0, 0.9}, {0.4, 0.3}, {1.0, 0.0}}, 2, 0.25);
  const auto pl2 = json(pl).get<ConnectionFunction>();
  CHECK(pl2.knots() == pl.knots());
  CHECK(pl2.eta() == 0.25);

  CHECK_THROWS_AS(ConnectionFunction::parse(json{{"kind", "annulus"},
                                                 {"params", json::object()}}),
                  std::invalid_argument);
  CHECK_THROWS(ConnectionFunction::parse(json{{"kind", "step"}}));
}

TEST_CASE("wrong kind accessors throw") {
  const auto ray = ConnectionFunction::rayleigh(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(ray.step_radius(), std::invalid_argument);
  const auto st = ConnectionFunction::step(0.1, 1.0);
  CHECK_THROWS_AS(st.rayleigh_beta(), std::invalid_argument);
}
