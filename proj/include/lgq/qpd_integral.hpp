#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lgq/quadrature.hpp"
#include "lgq/special_functions.hpp"
#include "lgq/states.hpp"

namespace lgq {

/// Gaussian quadratic form of the Heaviside-integral representation. After
/// the polar substitution the exponent is -(sigma(u) c^2 + 2 beta(u) c + delta)/2.
/// calE_i = 2 Re(E(t_i) gamma) - xbar(t_i) is the mean of a + a^dagger at t_i
/// relative to the cut.
struct QuadForm {
  Complex B;
  Complex w;  // E(t2) E(t1)^*
  double a1 = 0.0, a2 = 0.0;
  double calE1 = 0.0, calE2 = 0.0;
  int s1 = 1, s2 = 1;
  Complex delta;

  Complex sigma(double u) const {
    const double c = std::cos(u), s = std::sin(u);
    return (a2 * c * c + a1 * s * s - 2.0 * s1 * s2 * w * s * c) / B;
  }
  Complex beta_quad(double u) const {
    const double c = std::cos(u), s = std::sin(u);
    return (-a2 * s1 * calE1 * c - a1 * s2 * calE2 * s + w * (s2 * calE1 * s + s1 * calE2 * c)) / B;
  }
};

inline QuadForm make_quad_form(const StateSpec& state, const OffsetFunction& offset, int s1, int s2, double t1,
                               double t2, const UnitsConfig& units = {}) {
  QuadForm f;
  const Complex g = gamma_from(state.xi, state.r, state.theta0);
  const Complex e1 = mode_E(t1, state.r, state.theta0, units);
  const Complex e2 = mode_E(t2, state.r, state.theta0, units);
  f.calE1 = 2.0 * (e1 * g).real() - offset.at(t1, units);
  f.calE2 = 2.0 * (e2 * g).real() - offset.at(t2, units);
  f.w = e2 * std::conj(e1);
  f.a1 = std::norm(e1);
  f.a2 = std::norm(e2);
  f.B = f.a1 * f.a2 - f.w * f.w;
  f.s1 = s1;
  f.s2 = s2;
  f.delta = (f.a2 * f.calE1 * f.calE1 + f.a1 * f.calE2 * f.calE2 - 2.0 * f.w * f.calE1 * f.calE2) / f.B;
  return f;
}

/// Integral over c in [0, inf) of c exp(-(sigma c^2 + 2 beta c + delta)/2)
///   = e^{-delta/2} [1/sigma - (beta/sigma) sqrt(pi/(2 sigma)) erfcx(beta/sqrt(2 sigma))].
/// For Re z < 0 the reflection erfcx(z) = 2 e^{z^2} - erfcx(-z) is folded into
/// the exponent so that no intermediate overflows.
inline Complex c_integral_closed(Complex sigma, Complex beta, Complex delta) {
  if (!(sigma.real() > 0.0)) throw std::domain_error("c_integral_closed: Re(sigma) must be > 0");
  const Complex root = std::sqrt(2.0 * sigma);
  const Complex z = beta / root;
  const Complex pref = (beta / sigma) * std::sqrt(std::numbers::pi / (2.0 * sigma));
  const Complex ed = std::exp(-0.5 * delta);
  if (z.real() >= 0.0) return ed * (1.0 / sigma - pref * erfcx_complex(z));
  return ed * (1.0 / sigma + pref * erfcx_complex(-z)) - pref * 2.0 * std::exp(z * z - 0.5 * delta);
}

struct IntegralOptions {
  int quad_order = 16;  // Gauss-Legendre points per adaptive panel
  double tol = 1e-11;   // absolute target on q
  int max_depth = 40;
  bool self_check = true;  // repeat with doubled order and compare

  void validate() const {
    if (quad_order < 8) throw std::invalid_argument("IntegralOptions: quad_order must be >= 8");
    if (!(tol > 0.0)) throw std::invalid_argument("IntegralOptions: tol must be > 0");
  }
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double self_check_delta = 0.0;  // |q(order) - q(2 order)|
  int panels = 0;
  bool converged = true;
  bool coincident = false;  // singular B: times coincide modulo pi / omega
};

namespace detail {

// P(lo < Z < hi) for standard normal Z, accurate in both tails.
inline double normal_interval(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  constexpr double k = 0.70710678118654752440;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * k) - std::erfc(hi * k));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * k) - std::erfc(-lo * k));
  return 0.5 * (std::erf(hi * k) - std::erf(lo * k));
}

// At coincident times X(t2) = kappa X(t1) with kappa real, so the product of
// projectors is a classical joint event for one Gaussian variable.
inline double coincident_probability(const QuadForm& f) {
  const double sd = std::sqrt(f.a1);
  const double kappa = f.w.real() / f.a1;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double coeff, double mean) {
    // coeff * Z + mean > 0
    if (coeff > 0.0)
      lo = std::max(lo, -mean / coeff);
    else if (coeff < 0.0)
      hi = std::min(hi, -mean / coeff);
    else if (!(mean > 0.0))
      hi = lo;
  };
  clip(f.s1 * sd, f.s1 * f.calE1);
  clip(f.s2 * kappa * sd, f.s2 * f.calE2);
  return normal_interval(lo, hi);
}

inline bool is_coincident(const QuadForm& f) { return std::abs(f.B) <= 1e-13 * f.a1 * f.a2; }

}  // namespace detail

/// Heaviside-integral route for a pure squeezed coherent state and the sign
/// projector with offset: q = Re[(1/2pi) B^{-1/2} int_0^{pi/2} du C(u)],
/// C the closed-form c-integral. The u-integral is adaptive because the
/// integrand sharpens without bound as the two times approach coincidence
/// modulo pi/omega.
inline IntegralResult qpd_integral(const StateSpec& state, const OffsetFunction& offset, int s1, int s2, double t1,
                                   double t2, const IntegralOptions& opt = {}, const UnitsConfig& units = {}) {
  state.validate();
  offset.validate();
  opt.validate();
  units.validate();
  if (state.n_th != 0.0) throw std::invalid_argument("qpd_integral: thermal states are not supported by this route");
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) throw std::invalid_argument("qpd_integral: s must be +1 or -1");
  if (!std::isfinite(t1) || !std::isfinite(t2)) throw std::invalid_argument("qpd_integral: non-finite time");

  const QuadForm f = make_quad_form(state, offset, s1, s2, t1, t2, units);
  IntegralResult res;
  if (detail::is_coincident(f)) {
    res.value = detail::coincident_probability(f);
    res.coincident = true;
    return res;
  }
  const Complex pref = 1.0 / (2.0 * std::numbers::pi * std::sqrt(f.B));
  auto integrand = [&](double u) { return c_integral_closed(f.sigma(u), f.beta_quad(u), f.delta); };
  const double inner_tol = opt.tol / std::abs(pref);
  const auto main = integrate_adaptive(integrand, 0.0, 0.5 * std::numbers::pi, inner_tol, opt.quad_order, opt.max_depth);
  res.value = (pref * main.value).real();
  res.error_estimate = std::abs(pref) * main.error_estimate;
  res.panels = main.panels;
  res.converged = main.converged;
  if (opt.self_check) {
    const auto check =
        integrate_adaptive(integrand, 0.0, 0.5 * std::numbers::pi, inner_tol, 2 * opt.quad_order, opt.max_depth);
    res.self_check_delta = std::abs((pref * check.value).real() - res.value);
    if (res.self_check_delta > 1e-6) res.converged = false;
  }
  return res;
}

/// Same quantity by direct two-dimensional quadrature over (u, c) before the
/// closed-form c-integration. Serves as an oracle for c_integral_closed.
inline IntegralResult qpd_integral_2d(const StateSpec& state, const OffsetFunction& offset, int s1, int s2, double t1,
                                      double t2, int u_order = 16, int c_order = 16, double tol = 1e-10,
                                      const UnitsConfig& units = {}) {
  state.validate();
  offset.validate();
  units.validate();
  if (state.n_th != 0.0) throw std::invalid_argument("qpd_integral_2d: thermal states are not supported");
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) throw std::invalid_argument("qpd_integral_2d: s must be +1 or -1");
  if (u_order < 8 || c_order < 8) throw std::invalid_argument("qpd_integral_2d: orders must be >= 8");

  const QuadForm f = make_quad_form(state, offset, s1, s2, t1, t2, units);
  IntegralResult res;
  if (detail::is_coincident(f)) {
    res.value = detail::coincident_probability(f);
    res.coincident = true;
    return res;
  }
  const Complex pref = 1.0 / (2.0 * std::numbers::pi * std::sqrt(f.B));
  const double inner_tol = tol / std::abs(pref);
  bool all_converged = true;
  auto c_integral = [&](double u) {
    const Complex sg = f.sigma(u), bt = f.beta_quad(u);
    if (!(sg.real() > 0.0)) throw std::domain_error("qpd_integral_2d: Re(sigma) must be > 0");
    const double peak = std::max(0.0, -bt.real() / sg.real());
    const double cmax = peak + 40.0 / std::sqrt(sg.real());
    auto g = [&](double c) { return c * std::exp(-0.5 * (sg * c * c + 2.0 * bt * c + f.delta)); };
    const auto r = integrate_adaptive(g, 0.0, cmax, 0.01 * inner_tol, c_order, 40);
    if (!r.converged) all_converged = false;
    return r.value;
  };
  const auto outer = integrate_adaptive(c_integral, 0.0, 0.5 * std::numbers::pi, inner_tol, u_order, 40);
  res.value = (pref * outer.value).real();
  res.error_estimate = std::abs(pref) * outer.error_estimate;
  res.panels = outer.panels;
  res.converged = outer.converged && all_converged;
  return res;
}

}  // namespace lgq
