#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace softgeo {

// Where the last isolated vertex of a step graph tends to sit as n grows:
// the interior (Core), a side strip, a corner square, or the two crossover
// windows in between. Driven by u = p log n and v = p n^(1/3) log n.
enum class Regime { Core, CoreSideBoundary, Side, SideCornerBoundary, Corner };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Core: return "core";
    case Regime::CoreSideBoundary: return "core_side_boundary";
    case Regime::Side: return "side";
    case Regime::SideCornerBoundary: return "side_corner_boundary";
    case Regime::Corner: return "corner";
  }
  return "?";
}

inline Regime parse_regime(const std::string& name) {
  if (name == "core") return Regime::Core;
  if (name == "core_side_boundary") return Regime::CoreSideBoundary;
  if (name == "side") return Regime::Side;
  if (name == "side_corner_boundary") return Regime::SideCornerBoundary;
  if (name == "corner") return Regime::Corner;
  throw std::invalid_argument("unknown regime '" + name + "'");
}

struct RegimeClass {
  Regime regime;
  double u;  // p log n
  double v;  // p n^(1/3) log n
};

// Cutoffs at 1/3 and 3 split clear regimes from the crossover windows.
inline RegimeClass classify_regime(double n, double p) {
  if (!(n > 1.0)) throw std::invalid_argument("classify_regime: n must exceed 1");
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("classify_regime: p must lie in (0, 1]");
  RegimeClass rc{};
  rc.u = p * std::log(n);
  rc.v = rc.u * std::cbrt(n);
  if (rc.u >= 3.0)
    rc.regime = Regime::Core;
  else if (rc.u > 1.0 / 3.0)
    rc.regime = Regime::CoreSideBoundary;
  else if (rc.v >= 3.0)
    rc.regime = Regime::Side;
  else if (rc.v > 1.0 / 3.0)
    rc.regime = Regime::SideCornerBoundary;
  else
    rc.regime = Regime::Corner;
  return rc;
}

// Target expected isolated count alpha, achieved by choosing the step radius.
// J1 and J2 are the profile shape constants; the defaults are the step values.
struct RegimeSpec {
  Regime regime = Regime::Core;
  double n = 0.0;
  double p = 1.0;
  double alpha = 1.0;
  double J1 = 1.0;
  double J2 = M_PI;
};

struct RegimeSolution {
  double r = 0.0;         // step radius achieving the target
  double nI = 0.0;        // n times the mean connection integral
  double aux_root = 0.0;  // gamma or beta on the crossover windows, else 0
  Regime regime = Regime::Core;
  double u = 0.0;
  double v = 0.0;
};

namespace detail {

// Positive root of x^2 + b x = alpha, written to avoid cancellation.
inline double stable_quadratic_root(double b, double alpha) {
  return 2.0 * alpha / (b + std::sqrt(b * b + 4.0 * alpha));
}

}  // namespace detail

// nI as a function of alpha in each regime. The side and corner families
// need log log of n/p resp. 1/p, so they require n/p > e resp. p < 1/e.
inline double regime_nI(const RegimeSpec& s) {
  const double logn = std::log(s.n);
  switch (s.regime) {
    case Regime::Core:
      return logn - std::log(s.alpha);
    case Regime::Side: {
      const double lnp = std::log(s.n / s.p);
      if (!(lnp > 1.0))
        throw std::invalid_argument("regime_nI: side family needs n/p > e");
      return std::log(4.0 * s.J2 / (s.alpha * s.alpha * s.J1 * s.J1)) + lnp -
             std::log(lnp);
    }
    case Regime::Corner: {
      const double l1p = std::log(1.0 / s.p);
      if (!(l1p > 1.0))
        throw std::invalid_argument("regime_nI: corner family needs p < 1/e");
      return 4.0 * (l1p - std::log(l1p) +
                    std::log(s.J2 / (s.alpha * s.J1 * s.J1)));
    }
    case Regime::CoreSideBoundary: {
      const double b = 2.0 * (std::sqrt(s.J2) / s.J1) /
                       std::sqrt(s.p * logn);
      const double gamma = detail::stable_quadratic_root(b, s.alpha);
      return logn - 2.0 * std::log(gamma);
    }
    case Regime::SideCornerBoundary: {
      const double l1p = std::log(1.0 / s.p);
      if (!(l1p > 1.0))
        throw std::invalid_argument("regime_nI: corner family needs p < 1/e");
      const double c = std::pow(3.0 * s.J2, -1.5) * s.J1 * s.J1 * s.J1 *
                       std::pow(std::cbrt(s.n) * s.p * logn, 1.5);
      // Positive root of c beta^2 + beta = alpha.
      const double beta =
          2.0 * s.alpha / (1.0 + std::sqrt(1.0 + 4.0 * c * s.alpha));
      return 4.0 * (l1p - std::log(l1p) +
                    std::log(s.J2 / (beta * s.J1 * s.J1)));
    }
  }
  throw std::logic_error("regime_nI: unreachable");
}

// Auxiliary crossover root (gamma resp. beta), 0 for the pure regimes.
inline double regime_aux_root(const RegimeSpec& s) {
  const double logn = std::log(s.n);
  if (s.regime == Regime::CoreSideBoundary) {
    const double b = 2.0 * (std::sqrt(s.J2) / s.J1) / std::sqrt(s.p * logn);
    return detail::stable_quadratic_root(b, s.alpha);
  }
  if (s.regime == Regime::SideCornerBoundary) {
    const double c = std::pow(3.0 * s.J2, -1.5) * s.J1 * s.J1 * s.J1 *
                     std::pow(std::cbrt(s.n) * s.p * logn, 1.5);
    return 2.0 * s.alpha / (1.0 + std::sqrt(1.0 + 4.0 * c * s.alpha));
  }
  return 0.0;
}

inline RegimeSolution solve_r(const RegimeSpec& s) {
  if (!(s.n > 1.0)) throw std::invalid_argument("solve_r: n must exceed 1");
  if (!(s.p > 0.0 && s.p <= 1.0))
    throw std::invalid_argument("solve_r: p must lie in (0, 1]");
  if (!(s.alpha > 0.0) || !std::isfinite(s.alpha))
    throw std::invalid_argument("solve_r: alpha must be finite and positive");
  if (!(s.J1 > 0.0 && s.J2 > 0.0))
    throw std::invalid_argument("solve_r: shape constants must be positive");
  RegimeSolution sol;
  sol.regime = s.regime;
  sol.nI = regime_nI(s);
  if (!(sol.nI > 0.0))
    throw std::invalid_argument(
        "solve_r: target alpha is out of range for these parameters (nI <= 0)");
  sol.aux_root = regime_aux_root(s);
  sol.r = std::sqrt(sol.nI / (s.n * s.p * s.J2));
  const double logn = std::log(s.n);
  sol.u = s.p * logn;
  sol.v = sol.u * std::cbrt(s.n);
  return sol;
}

// Inverse map: the alpha that a given nI corresponds to in each regime.
inline double alpha_from_nI(Regime regime, double n, double p, double nI,
                            double J1 = 1.0, double J2 = M_PI) {
  const double logn = std::log(n);
  switch (regime) {
    case Regime::Core:
      return std::exp(logn - nI);
    case Regime::Side: {
      const double lnp = std::log(n / p);
      return std::sqrt(4.0 * J2 / (J1 * J1) * std::exp(lnp - nI) / lnp);
    }
    case Regime::Corner: {
      const double l1p = std::log(1.0 / p);
      return J2 / (J1 * J1) / (p * l1p) * std::exp(-0.25 * nI);
    }
    case Regime::CoreSideBoundary: {
      const double gamma = std::exp(0.5 * (logn - nI));
      const double b = 2.0 * (std::sqrt(J2) / J1) / std::sqrt(p * logn);
      return gamma * gamma + b * gamma;
    }
    case Regime::SideCornerBoundary: {
      const double l1p = std::log(1.0 / p);
      const double beta =
          J2 / (J1 * J1) / (p * l1p) * std::exp(-0.25 * nI);
      const double c = std::pow(3.0 * J2, -1.5) * J1 * J1 * J1 *
                       std::pow(std::cbrt(n) * p * logn, 1.5);
      return c * beta * beta + beta;
    }
  }
  throw std::logic_error("alpha_from_nI: unreachable");
}

// Classical sharp-threshold prediction for the connectivity probability of
// the interior-dominated model, exp(-exp(-beta)) with beta = n pi r^2 p - log n.
// Outside the core regime the side and corner strips contribute isolated
// vertices the formula never sees, so the prediction is flagged misleading.
struct GKPrediction {
  double beta = 0.0;
  double predicted_limit = 0.0;
  bool misleading = false;
  RegimeClass cls{};
};

inline GKPrediction gk_prediction(double n, double r, double p) {
  GKPrediction g;
  g.beta = n * M_PI * r * r * p - std::log(n);
  g.predicted_limit = std::exp(-std::exp(-g.beta));
  g.cls = classify_regime(n, p);
  g.misleading = g.cls.regime != Regime::Core;
  return g;
}

}  // namespace softgeo
