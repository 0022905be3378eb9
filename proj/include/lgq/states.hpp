#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "lgq/special_functions.hpp"

namespace lgq {

/// Angular frequency of the oscillator. Every time enters as omega * t.
struct UnitsConfig {
  double omega = 1.0;

  void validate() const {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("UnitsConfig: omega must be positive");
  }
};

/// Initial state D(xi) S(zeta) rho_th S(zeta)^dagger D(xi)^dagger with
/// zeta = r exp(i theta0) and thermal occupation n_th (zero for a pure state).
struct StateSpec {
  Complex xi{0.0, 0.0};
  double r = 0.0;
  double theta0 = 0.0;
  double n_th = 0.0;

  /// x0 = sqrt(2) Re xi, p0 = sqrt(2) Im xi.
  static StateSpec from_phase_space(double x0, double p0, double r = 0.0, double theta0 = 0.0, double n_th = 0.0) {
    return {Complex(x0, p0) / std::numbers::sqrt2, r, theta0, n_th};
  }

  double x0() const { return std::numbers::sqrt2 * xi.real(); }
  double p0() const { return std::numbers::sqrt2 * xi.imag(); }

  void validate() const {
    if (!std::isfinite(xi.real()) || !std::isfinite(xi.imag()) || !std::isfinite(r) || !std::isfinite(theta0) ||
        !std::isfinite(n_th))
      throw std::invalid_argument("StateSpec: non-finite field");
    if (r < 0.0) throw std::invalid_argument("StateSpec: r must be >= 0");
    if (n_th < 0.0) throw std::invalid_argument("StateSpec: n_th must be >= 0");
  }
};

/// Projector offset xbar(t) = amplitude cos(omega t - phase) + constant.
///
/// Values are on the quadrature scale a + a^dagger, i.e. sqrt(2) times the
/// dimensionless position, so the sign projector is theta(s (X - xbar)) with
/// X = a + a^dagger. On this scale a coherent state |xi> with xbar = 0 and the
/// ground state with xbar(t) = -2|xi| cos(omega t - arg xi) give identical
/// quasi-probabilities.
struct OffsetFunction {
  double amplitude = 0.0;
  double phase = 0.0;
  double constant = 0.0;

  double at(double t, const UnitsConfig& units = {}) const {
    return amplitude * std::cos(units.omega * t - phase) + constant;
  }
  /// Offset in dimensionless position units.
  double position_at(double t, const UnitsConfig& units = {}) const { return at(t, units) / std::numbers::sqrt2; }
  bool is_zero() const { return amplitude == 0.0 && constant == 0.0; }

  void validate() const {
    if (!std::isfinite(amplitude) || !std::isfinite(phase) || !std::isfinite(constant))
      throw std::invalid_argument("OffsetFunction: non-finite field");
  }

  /// The offset that makes the ground state mimic the coherent state |xi>.
  static OffsetFunction mimicking_coherent(Complex xi) {
    return {-2.0 * std::abs(xi), std::arg(xi), 0.0};
  }
};

/// gamma with D(xi) S(zeta) = S(zeta) D(gamma).
inline Complex gamma_from(Complex xi, double r, double theta0) {
  if (r < 0.0) throw std::invalid_argument("gamma_from: r must be >= 0");
  if (r == 0.0) return xi;
  return xi * std::cosh(r) - std::conj(xi) * std::polar(1.0, theta0) * std::sinh(r);
}

/// E(t) = exp(-i w t) cosh r + exp(i w t) exp(-i theta0) sinh r.
inline Complex mode_E(double t, double r, double theta0, const UnitsConfig& units = {}) {
  const double wt = units.omega * t;
  return std::polar(std::cosh(r), -wt) + std::polar(std::sinh(r), wt - theta0);
}

/// A(t) = cosh r + cos(theta0 - 2 w t) sinh r. Always >= exp(-r) > 0.
inline double rotation_A(double t, double r, double theta0, const UnitsConfig& units = {}) {
  return std::cosh(r) + std::cos(theta0 - 2.0 * units.omega * t) * std::sinh(r);
}

/// B(t) = sin(theta0 - 2 w t) sinh r.
inline double rotation_B(double t, double r, double theta0, const UnitsConfig& units = {}) {
  return std::sin(theta0 - 2.0 * units.omega * t) * std::sinh(r);
}

/// lambda(t) = sqrt(sinh 2r cos(2 w t - theta0) + cosh 2r) = |E(t)|.
inline double lambda_of(double t, double r, double theta0, const UnitsConfig& units = {}) {
  const double v = std::sinh(2.0 * r) * std::cos(2.0 * units.omega * t - theta0) + std::cosh(2.0 * r);
  return std::sqrt(v);
}

/// beta(t) = arg(A + iB). Because A > 0 the principal atan2 branch lies in
/// (-pi/2, pi/2) and is already continuous in t; no unwrapping is needed.
inline double phase_beta_of(double t, double r, double theta0, const UnitsConfig& units = {}) {
  return std::atan2(rotation_B(t, r, theta0, units), rotation_A(t, r, theta0, units));
}

/// x_{xi(t)} = sqrt(2) Re[xi exp(-i w t)] = x0 cos wt + p0 sin wt.
inline double x_xi_of(double t, Complex xi, const UnitsConfig& units = {}) {
  return std::numbers::sqrt2 * (xi * std::polar(1.0, -units.omega * t)).real();
}

/// Time reparameterization t -> t + beta(t)/omega.
struct ReducedTime {
  double r = 0.0;
  double theta0 = 0.0;
  UnitsConfig units{};

  double operator()(double t) const {
    if (r == 0.0) return t;
    return t + phase_beta_of(t, r, theta0, units) / units.omega;
  }
};

struct CoherentReduction {
  Complex xi_prime;
  ReducedTime time_map;
};

/// Maps a squeezed coherent state onto the coherent state whose
/// quasi-probability at the reparameterized times is identical:
/// q_sq(xi, zeta; t1, t2) = q_coh(xi'; t1 + beta(t1)/w, t2 + beta(t2)/w)
/// with xi' = gamma = xi cosh r - xi^* e^{i theta0} sinh r.
inline CoherentReduction reduce_squeezed_to_coherent(const StateSpec& spec, const UnitsConfig& units = {}) {
  spec.validate();
  if (spec.r == 0.0) return {spec.xi, ReducedTime{0.0, spec.theta0, units}};
  return {gamma_from(spec.xi, spec.r, spec.theta0), ReducedTime{spec.r, spec.theta0, units}};
}

/// Inverse of the reduction amplitude map:
/// x0' = x0 (cosh r + sinh r cos theta0) + p0 sinh r sin theta0,
/// p0' = x0 sinh r sin theta0 + p0 (cosh r - sinh r cos theta0).
/// A coherent state |xi> and the squeezed state with amplitude
/// coherent_to_squeezed_amplitude(xi) trace the same curve up to the time map.
inline Complex coherent_to_squeezed_amplitude(Complex xi, double r, double theta0) {
  return xi * std::cosh(r) + std::conj(xi) * std::polar(1.0, theta0) * std::sinh(r);
}

/// Bose-Einstein weight of |m> in a thermal state: (1/(1+N)) (N/(1+N))^m.
inline double thermal_weight(int m, double n_th) {
  if (m < 0) throw std::invalid_argument("thermal_weight: negative index");
  if (n_th < 0.0) throw std::invalid_argument("thermal_weight: n_th must be >= 0");
  if (n_th == 0.0) return m == 0 ? 1.0 : 0.0;
  const double ratio = n_th / (1.0 + n_th);
  return std::pow(ratio, m) / (1.0 + n_th);
}

/// N_th = 1 / (exp(1/T) - 1) for T = k_B T / (hbar omega); T = 0 gives 0.
inline double n_th_from_temperature(double temp_ratio) {
  if (temp_ratio < 0.0 || !std::isfinite(temp_ratio)) throw std::invalid_argument("temperature ratio must be >= 0");
  if (temp_ratio == 0.0) return 0.0;
  return 1.0 / std::expm1(1.0 / temp_ratio);
}

/// Smallest m with thermal_weight(m, n_th) < threshold.
inline int thermal_cutoff(double n_th, double threshold) {
  if (n_th == 0.0) return 0;
  const double ratio = n_th / (1.0 + n_th);
  const double m = std::log(threshold * (1.0 + n_th)) / std::log(ratio);
  return std::max(0, static_cast<int>(std::ceil(m)));
}

}  // namespace lgq
