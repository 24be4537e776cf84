#pragma once

// Connection functions: radial, nonincreasing profiles phi with values in
// [0, 1]. A pair of points at displacement x is joined independently with
// probability phi(|x|). Three kinds are supported:
//   Step(r, p)                p on [0, r], 0 beyond (the classic hard disk
//                             softened by a retention probability)
//   Rayleigh(beta, gamma, rho) exp(-beta (t/rho)^gamma), fading-style tails
//   CustomRadial(knots)       piecewise-linear nonincreasing profile
//
// Scale and shape descriptors:
//   mu       sup phi (value at 0)
//   rho_eta  inf{t : phi(t) < eta mu}, the level radius at level eta
//   rho_0    sup{t : phi(t) > 0}, the support radius
//   I        integral of phi over R^d
//   J1       mu^-1 int_0^inf phi(rho_eta t) dt        (ray integral)
//   J2       mu^-1 int_0^inf phi(rho_eta t) 2 pi t dt (planar polar integral)
// For radial nonincreasing phi in d = 2 these satisfy I = mu rho_eta^2 J2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "softgeo/detail/quad1d.hpp"

namespace softgeo {

using json = nlohmann::ordered_json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Radius at which integrands over phi are truncated: beyond the level radius
// of 1e-14 the profile contributes less than machine-level mass.
inline constexpr double kProfileTruncationLevel = 1e-14;

enum class Kind { Step, Rayleigh, CustomRadial };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Step: return "step";
    case Kind::Rayleigh: return "rayleigh";
    case Kind::CustomRadial: return "custom_radial";
  }
  return "?";
}

struct ShapeDescriptor {
  double mu = 0.0;
  double rho_eta = 0.0;
  double rho0 = 0.0;
  double I = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
};

class ConnectionFunction {
 public:
  static ConnectionFunction step(double r, double p, int d = 2,
                                 double eta = 1.0) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("step: radius must be positive and finite");
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("step: probability must lie in (0, 1]");
    ConnectionFunction f(Kind::Step, d, eta);
    f.step_r_ = r;
    f.step_p_ = p;
    return f;
  }

  static ConnectionFunction rayleigh(double beta, double gamma, double rho,
                                     int d = 2, double eta = std::exp(-1.0)) {
    if (!(beta > 0.0) || !(gamma > 0.0) || !(rho > 0.0))
      throw std::invalid_argument(
          "rayleigh: beta, gamma and rho must be positive");
    ConnectionFunction f(Kind::Rayleigh, d, eta);
    f.ray_beta_ = beta;
    f.ray_gamma_ = gamma;
    f.ray_rho_ = rho;
    return f;
  }

  // Knots are (radius, value) pairs: radii strictly increasing starting at 0,
  // values nonincreasing within [0, 1] and positive at the origin. The
  // profile is linear between knots and constant past the last knot. Anything
  // non-monotone (an annulus, say) is rejected here rather than detected
  // later.
  static ConnectionFunction custom_radial(
      std::vector<std::array<double, 2>> knots, int d = 2, double eta = 0.5) {
    if (knots.size() < 2)
      throw std::invalid_argument("custom_radial: need at least two knots");
    if (knots.front()[0] != 0.0)
      throw std::invalid_argument("custom_radial: first knot must be at radius 0");
    if (!(knots.front()[1] > 0.0))
      throw std::invalid_argument("custom_radial: value at radius 0 must be positive");
    for (size_t k = 0; k < knots.size(); ++k) {
      if (!(knots[k][1] >= 0.0 && knots[k][1] <= 1.0))
        throw std::invalid_argument("custom_radial: values must lie in [0, 1]");
      if (k > 0) {
        if (!(knots[k][0] > knots[k - 1][0]))
          throw std::invalid_argument(
              "custom_radial: knot radii must be strictly increasing");
        if (knots[k][1] > knots[k - 1][1])
          throw std::invalid_argument(
              "custom_radial: profile must be nonincreasing");
      }
    }
    ConnectionFunction f(Kind::CustomRadial, d, eta);
    f.knots_ = std::move(knots);
    return f;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double eta() const { return eta_; }

  double mu() const {
    switch (kind_) {
      case Kind::Step: return step_p_;
      case Kind::Rayleigh: return 1.0;
      case Kind::CustomRadial: return knots_.front()[1];
    }
    return 0.0;
  }

  // Profile value at radial distance t >= 0.
  double radial(double t) const {
    switch (kind_) {
      case Kind::Step:
        return t <= step_r_ ? step_p_ : 0.0;
      case Kind::Rayleigh:
        return std::exp(-ray_beta_ * std::pow(t / ray_rho_, ray_gamma_));
      case Kind::CustomRadial: {
        if (t >= knots_.back()[0]) return knots_.back()[1];
        const auto it = std::upper_bound(
            knots_.begin(), knots_.end(), t,
            [](double v, const std::array<double, 2>& k) { return v < k[0]; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        const double w = (t - a[0]) / (b[0] - a[0]);
        return a[1] + w * (b[1] - a[1]);
      }
    }
    return 0.0;
  }

  double eval(std::span<const double> displacement) const {
    if (static_cast<int>(displacement.size()) != dim_)
      throw std::invalid_argument("eval: displacement dimension mismatch");
    double s = 0.0;
    for (double c : displacement) s += c * c;
    return radial(std::sqrt(s));
  }

  // Level radius: inf{t : phi(t) < level * mu}. Closed form for Step and
  // Rayleigh; bisection on the monotone profile otherwise. Returns +inf when
  // the profile never drops below the level.
  double level_radius(double level) const {
    if (!(level > 0.0 && level <= 1.0))
      throw std::invalid_argument("level_radius: level must lie in (0, 1]");
    const double c = level * mu();
    switch (kind_) {
      case Kind::Step:
        return step_r_;
      case Kind::Rayleigh:
        return level == 1.0
                   ? 0.0
                   : ray_rho_ * std::pow(std::log(1.0 / level) / ray_beta_,
                                         1.0 / ray_gamma_);
      case Kind::CustomRadial: {
        if (knots_.back()[1] >= c) return kInf;
        double lo = 0.0;                 // radial(lo) >= c
        double hi = knots_.back()[0];    // radial(hi) < c
        if (radial(lo) < c) return 0.0;
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (radial(mid) >= c ? lo : hi) = mid;
        }
        return hi;
      }
    }
    return 0.0;
  }

  // Support radius sup{t : phi(t) > 0}; +inf for heavy tails.
  double rho0() const {
    switch (kind_) {
      case Kind::Step:
        return step_r_;
      case Kind::Rayleigh:
        return kInf;
      case Kind::CustomRadial:
        if (knots_.back()[1] > 0.0) return kInf;
        for (size_t k = 0; k < knots_.size(); ++k)
          if (knots_[k][1] == 0.0) return knots_[k][0];
        return knots_.back()[0];
    }
    return 0.0;
  }

  // Radii where the profile is non-smooth; quadrature panels split here.
  std::vector<double> radial_breakpoints() const {
    switch (kind_) {
      case Kind::Step:
        return {step_r_};
      case Kind::Rayleigh:
        return {};
      case Kind::CustomRadial: {
        std::vector<double> out;
        for (const auto& k : knots_) out.push_back(k[0]);
        return out;
      }
    }
    return {};
  }

  // Step parameters (throws for other kinds); used by covering fast paths
  // and by the coupled increasing-radius process.
  double step_radius() const {
    require_kind(Kind::Step, "step_radius");
    return step_r_;
  }
  double step_probability() const {
    require_kind(Kind::Step, "step_probability");
    return step_p_;
  }

  double rayleigh_beta() const { require_kind(Kind::Rayleigh, "rayleigh_beta"); return ray_beta_; }
  double rayleigh_gamma() const { require_kind(Kind::Rayleigh, "rayleigh_gamma"); return ray_gamma_; }
  double rayleigh_rho() const { require_kind(Kind::Rayleigh, "rayleigh_rho"); return ray_rho_; }
  const std::vector<std::array<double, 2>>& knots() const { return knots_; }

  static ConnectionFunction parse(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int d = j.value("d", 2);
    const auto& params = j.at("params");
    if (kind == "step") {
      return step(params.at("r").get<double>(), params.at("p").get<double>(),
                  d, j.value("eta", 1.0));
    }
    if (kind == "rayleigh") {
      return rayleigh(params.at("beta").get<double>(),
                      params.at("gamma").get<double>(),
                      params.at("rho").get<double>(), d,
                      j.value("eta", std::exp(-1.0)));
    }
    if (kind == "custom_radial") {
      std::vector<std::array<double, 2>> knots;
      for (const auto& row : params.at("profile"))
        knots.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
      return custom_radial(std::move(knots), d, j.value("eta", 0.5));
    }
    throw std::invalid_argument("connection: unknown kind '" + kind + "'");
  }

 private:
  ConnectionFunction(Kind kind, int d, double eta) : kind_(kind), dim_(d), eta_(eta) {
    if (d != 2 && d != 3)
      throw std::invalid_argument("connection: dimension must be 2 or 3");
    if (!(eta > 0.0 && eta <= 1.0))
      throw std::invalid_argument("connection: eta must lie in (0, 1]");
  }

  void require_kind(Kind k, const char* what) const {
    if (kind_ != k)
      throw std::invalid_argument(std::string(what) + ": wrong connection kind");
  }

  Kind kind_;
  int dim_;
  double eta_;
  double step_r_ = 0.0, step_p_ = 0.0;
  double ray_beta_ = 0.0, ray_gamma_ = 0.0, ray_rho_ = 0.0;
  std::vector<std::array<double, 2>> knots_;
};

inline void to_json(json& j, const ConnectionFunction& f) {
  j = json{{"kind", kind_name(f.kind())}, {"d", f.dim()}, {"eta", f.eta()}};
  switch (f.kind()) {
    case Kind::Step:
      j["params"] = json{{"r", f.step_radius()}, {"p", f.step_probability()}};
      break;
    case Kind::Rayleigh:
      j["params"] = json{{"beta", f.rayleigh_beta()},
                         {"gamma", f.rayleigh_gamma()},
                         {"rho", f.rayleigh_rho()}};
      break;
    case Kind::CustomRadial: {
      json prof = json::array();
      for (const auto& k : f.knots()) prof.push_back({k[0], k[1]});
      j["params"] = json{{"profile", prof}};
      break;
    }
  }
}

inline double eval_phi(const ConnectionFunction& f,
                       std::span<const double> displacement) {
  return f.eval(displacement);
}

inline double rho_level(const ConnectionFunction& f, double level) {
  return f.level_radius(level);
}

namespace detail {

inline double sphere_surface(int d) {
  // Surface measure of the unit sphere S^{d-1}.
  return d == 2 ? 2.0 * M_PI : 4.0 * M_PI;
}

}  // namespace detail

// Scale and shape descriptor, computed by radial quadrature truncated at the
// profile's 1e-14 level radius. Rejects profiles whose tail never decays
// below that level (their integrals diverge) and profiles whose level radius
// at eta degenerates to 0 or infinity.
inline ShapeDescriptor shape_integrals(const ConnectionFunction& f) {
  ShapeDescriptor sd;
  sd.mu = f.mu();
  sd.rho_eta = f.level_radius(f.eta());
  sd.rho0 = f.rho0();
  const double T = f.level_radius(kProfileTruncationLevel);
  if (!std::isfinite(T))
    throw std::invalid_argument(
        "shape_integrals: profile tail never decays below the truncation "
        "level; integrals diverge");
  if (!(sd.rho_eta > 0.0) || !std::isfinite(sd.rho_eta))
    throw std::invalid_argument(
        "shape_integrals: level radius at eta is degenerate (0 or infinite)");
  const int d = f.dim();
  const auto breaks = f.radial_breakpoints();

  const auto radial_moment = [&](double t) {
    return f.radial(t) * (d == 2 ? t : t * t);
  };
  sd.I = detail::sphere_surface(d) *
         detail::integrate_adaptive(radial_moment, 0.0, T, breaks,
                                    1e-13 * sd.mu * std::max(T * T, 1e-30));

  // J integrals live in units of the level radius; rescale the breakpoints.
  const double S = T / sd.rho_eta;
  std::vector<double> sbreaks;
  for (double b : breaks) sbreaks.push_back(b / sd.rho_eta);
  const auto ray = [&](double s) { return f.radial(sd.rho_eta * s) / sd.mu; };
  const auto polar = [&](double s) {
    return f.radial(sd.rho_eta * s) / sd.mu * 2.0 * M_PI * s;
  };
  sd.J1 = detail::integrate_adaptive(ray, 0.0, S, sbreaks,
                                     1e-13 * std::max(S, 1.0));
  sd.J2 = detail::integrate_adaptive(polar, 0.0, S, sbreaks,
                                     1e-13 * std::max(S * S, 1.0));
  return sd;
}

// Normalizing constant of the envelope profile 3 eta^-1 exp(-eta t^eta) over
// R^d, by the same truncated radial quadrature.
inline double k_eta(double eta, int d) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("k_eta: eta must lie in (0, 1]");
  if (d != 2 && d != 3) throw std::invalid_argument("k_eta: d must be 2 or 3");
  // exp(-eta T^eta) = 1e-18 picks the truncation radius.
  const double T = std::pow(std::log(1e18) / eta, 1.0 / eta);
  const auto g = [&](double t) {
    return (3.0 / eta) * std::exp(-eta * std::pow(t, eta)) *
           (d == 2 ? t : t * t);
  };
  // Geometric panels cope with the wide dynamic range of the tail.
  std::vector<double> breaks;
  for (double t = 1.0; t < T; t *= 2.0) breaks.push_back(t);
  // Coarse pass sizes the absolute tolerance; small eta inflates the value by
  // many orders of magnitude.
  const double rough =
      detail::integrate_adaptive(g, 0.0, T, breaks, 1.0, 12);
  const double tol = 1e-12 * std::max(std::fabs(rough), 1.0);
  return detail::sphere_surface(d) *
         detail::integrate_adaptive(g, 0.0, T, breaks, tol);
}

struct ClassReport {
  bool radial_nonincreasing = false;  // holds for every constructible kind
  bool envelope_ok = false;           // phi <= 3 eta^-1 mu exp(-eta (t/rho_eta)^eta)
  bool level_radius_ok = false;       // rho_eta in (0, inf)
  bool compact_ok = false;            // rho_0 <= rho_eta / eta
  bool in_envelope_class = false;     // level_radius_ok && envelope_ok
  bool in_compact_class = false;      // in_envelope_class && compact_ok
  double rho_eta = 0.0;
  double rho0 = 0.0;
  double envelope_margin = 0.0;       // max phi / envelope over the check grid
  std::string detail;
};

// Checks membership against the envelope class at a given eta. The envelope
// inequality is verified on a geometric grid of radii, rho_eta * 2^(k/4) for
// k in [-80, 80], augmented with the profile's own breakpoints.
inline ClassReport validate_class(const ConnectionFunction& f, double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("validate_class: eta must lie in (0, 1]");
  ClassReport rep;
  rep.radial_nonincreasing = true;  // enforced by every constructor
  rep.rho_eta = f.level_radius(eta);
  rep.rho0 = f.rho0();
  if (!(rep.rho_eta > 0.0) || !std::isfinite(rep.rho_eta)) {
    rep.level_radius_ok = false;
    rep.detail = "level radius at eta is degenerate";
    return rep;
  }
  rep.level_radius_ok = true;

  const double mu = f.mu();
  const auto envelope = [&](double t) {
    return (3.0 / eta) * mu *
           std::exp(-eta * std::pow(t / rep.rho_eta, eta));
  };
  double worst = 0.0;
  const auto consider = [&](double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) return;
    const double phi = f.radial(t);
    if (phi <= 0.0) return;
    worst = std::max(worst, phi / envelope(t));
  };
  consider(0.0);
  for (int k = -80; k <= 80; ++k)
    consider(rep.rho_eta * std::pow(2.0, 0.25 * k));
  for (double b : f.radial_breakpoints()) {
    consider(b);
    consider(std::nextafter(b, kInf));
  }
  rep.envelope_margin = worst;
  rep.envelope_ok = worst <= 1.0 + 1e-12;
  rep.compact_ok = rep.rho0 <= rep.rho_eta / eta;
  rep.in_envelope_class = rep.level_radius_ok && rep.envelope_ok;
  rep.in_compact_class = rep.in_envelope_class && rep.compact_ok;
  if (!rep.envelope_ok) rep.detail = "envelope bound violated";
  return rep;
}

// Largest eta on the dyadic grid {1, 1/2, 1/4, ...} for which the profile
// sits inside the envelope class; 0 when none passes down to 2^-20.
inline double find_envelope_eta(const ConnectionFunction& f) {
  for (double eta = 1.0; eta >= 0x1p-20; eta *= 0.5)
    if (validate_class(f, eta).in_envelope_class) return eta;
  return 0.0;
}

}  // namespace softgeo

// get<ConnectionFunction>() support without a default constructor.
namespace nlohmann {
template <>
struct adl_serializer<softgeo::ConnectionFunction> {
  template <typename BasicJsonType>
  static softgeo::ConnectionFunction from_json(const BasicJsonType& j) {
    return softgeo::ConnectionFunction::parse(j);
  }
  template <typename BasicJsonType>
  static void to_json(BasicJsonType& j, const softgeo::ConnectionFunction& f) {
    softgeo::json out;
    softgeo::to_json(out, f);
    j = std::move(out);
  }
};
}  // namespace nlohmann
