#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgq {

using Complex = std::complex<double>;

/// Thrown when a request exceeds a configured index or size limit.
class CapabilityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Thrown when a result cannot be represented (e.g. erfc overflow).
class NumericalOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

inline constexpr int kHermiteIndexCap = 512;
inline constexpr int kHermiteTableCap = 1 << 20;

inline double erf_real(double x) { return std::erf(x); }

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Power series inside the ellipse (x/6.3)^2 + (y/4.4)^2 < 0.085264, Laplace
/// continued fraction (with a truncated Taylor correction in the transition
/// band) elsewhere; lower half-plane through w(z) = 2 exp(-z^2) - w(-z).
/// Relative accuracy is about 1e-13 over the plane (Poppe & Wijers 1990).
inline Complex faddeeva_w(Complex z) {
  constexpr double factor = 1.12837916709551257388;  // 2 / sqrt(pi)
  const double xi = z.real();
  const double yi = z.imag();
  if (!std::isfinite(xi) || !std::isfinite(yi)) throw std::domain_error("faddeeva_w: non-finite argument");

  const double xabs = std::abs(xi);
  const double yabs = std::abs(yi);
  const double x = xabs / 6.3;
  const double y = yabs / 4.4;
  double qrho = x * x + y * y;
  double xquad = xabs * xabs - yabs * yabs;
  const double yquad = 2.0 * xabs * yabs;

  double u = 0.0, v = 0.0, u2 = 0.0, v2 = 0.0;
  const bool series = qrho < 0.085264;
  if (series) {
    qrho = (1.0 - 0.85 * y) * std::sqrt(qrho);
    const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
    int j = 2 * n + 1;
    double xsum = 1.0 / j;
    double ysum = 0.0;
    for (int i = n; i >= 1; --i) {
      j -= 2;
      const double xaux = (xsum * xquad - ysum * yquad) / i;
      ysum = (xsum * yquad + ysum * xquad) / i;
      xsum = xaux + 1.0 / j;
    }
    const double u1 = -factor * (xsum * yabs + ysum * xabs) + 1.0;
    const double v1 = factor * (xsum * xabs - ysum * yabs);
    const double daux = std::exp(-xquad);
    u2 = daux * std::cos(yquad);
    v2 = -daux * std::sin(yquad);
    u = u1 * u2 - v1 * v2;
    v = u1 * v2 + v1 * u2;
  } else {
    double h = 0.0, h2 = 0.0;
    int kapn = 0, nu = 0;
    if (qrho > 1.0) {
      qrho = std::sqrt(qrho);
      nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
    } else {
      qrho = (1.0 - y) * std::sqrt(1.0 - qrho);
      h = 1.88 * qrho;
      h2 = 2.0 * h;
      kapn = static_cast<int>(std::lround(7.0 + 34.0 * qrho));
      nu = static_cast<int>(std::lround(16.0 + 26.0 * qrho));
    }
    const bool taylor = h > 0.0;
    double qlambda = taylor ? std::pow(h2, kapn) : 0.0;
    double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
    for (int n = nu; n >= 0; --n) {
      const double np1 = n + 1.0;
      double tx = yabs + h + np1 * rx;
      const double ty = xabs - np1 * ry;
      const double c = 0.5 / (tx * tx + ty * ty);
      rx = c * tx;
      ry = c * ty;
      if (taylor && n <= kapn) {
        tx = qlambda + sx;
        sx = rx * tx - ry * sy;
        sy = ry * tx + rx * sy;
        qlambda /= h2;
      }
    }
    if (taylor) {
      u = factor * sx;
      v = factor * sy;
    } else {
      u = factor * rx;
      v = factor * ry;
    }
    if (yabs == 0.0) u = std::exp(-xabs * xabs);
  }

  if (yi < 0.0) {
    if (series) {
      u2 *= 2.0;
      v2 *= 2.0;
    } else {
      xquad = -xquad;
      const double w1 = 2.0 * std::exp(xquad);
      u2 = w1 * std::cos(yquad);
      v2 = -w1 * std::sin(yquad);
    }
    u = u2 - u;
    v = v2 - v;
    if (xi > 0.0) v = -v;
  } else if (xi < 0.0) {
    v = -v;
  }
  return {u, v};
}

/// Scaled complementary error function exp(z^2) erfc(z) = w(iz).
inline Complex erfcx_complex(Complex z) { return faddeeva_w(Complex(-z.imag(), z.real())); }

/// Complementary error function for complex argument. Throws
/// NumericalOverflow when |erfc(z)| is not representable (Re z < 0 with
/// Re(z^2) strongly negative); use erfcx_complex there.
inline Complex erfc_complex(Complex z) {
  Complex out;
  if (z.real() >= 0.0) {
    out = std::exp(-z * z) * erfcx_complex(z);
  } else {
    out = 2.0 - std::exp(-z * z) * erfcx_complex(-z);
  }
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
    throw NumericalOverflow("erfc_complex: result overflows for z = (" + std::to_string(z.real()) + ", " +
                            std::to_string(z.imag()) + ")");
  }
  return out;
}

/// Normalized oscillator eigenfunctions psi_0..psi_{n_max} at x, by the
/// upward recurrence psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}.
/// Values underflow to zero for |x| beyond about 37.
inline void hermite_psi_table(int n_max, double x, std::span<double> psi) {
  if (n_max < 0) throw std::invalid_argument("hermite_psi_table: negative index");
  if (n_max > kHermiteTableCap) throw CapabilityError("hermite_psi_table: index above table cap");
  if (psi.size() < static_cast<std::size_t>(n_max) + 1) throw std::invalid_argument("hermite_psi_table: span too small");
  const double pi_m14 = 0.75112554446494248286;  // pi^(-1/4)
  psi[0] = pi_m14 * std::exp(-0.5 * x * x);
  if (n_max == 0) return;
  psi[1] = std::numbers::sqrt2 * x * psi[0];
  for (int k = 1; k < n_max; ++k) {
    psi[static_cast<std::size_t>(k) + 1] =
        std::sqrt(2.0 / (k + 1)) * x * psi[static_cast<std::size_t>(k)] -
        std::sqrt(static_cast<double>(k) / (k + 1)) * psi[static_cast<std::size_t>(k) - 1];
  }
}

inline std::vector<double> hermite_psi_table(int n_max, double x) {
  std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
  hermite_psi_table(n_max, x, psi);
  return psi;
}

/// Derivatives from a psi table: psi'_k = sqrt(2k) psi_{k-1} - x psi_k.
inline void hermite_psi_prime_table(std::span<const double> psi, double x, std::span<double> dpsi) {
  if (psi.empty()) return;
  dpsi[0] = -x * psi[0];
  for (std::size_t k = 1; k < psi.size(); ++k) dpsi[k] = std::sqrt(2.0 * k) * psi[k - 1] - x * psi[k];
}

/// psi_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2).
inline double hermite_psi(int n, double x, int index_cap = kHermiteIndexCap) {
  if (n < 0) throw std::invalid_argument("hermite_psi: negative index");
  if (n > index_cap) throw CapabilityError("hermite_psi: index " + std::to_string(n) + " above cap");
  if (!std::isfinite(x)) throw std::domain_error("hermite_psi: non-finite argument");
  return hermite_psi_table(n, x)[static_cast<std::size_t>(n)];
}

inline double hermite_psi_prime(int n, double x, int index_cap = kHermiteIndexCap) {
  if (n < 0) throw std::invalid_argument("hermite_psi_prime: negative index");
  if (n > index_cap) throw CapabilityError("hermite_psi_prime: index " + std::to_string(n) + " above cap");
  if (!std::isfinite(x)) throw std::domain_error("hermite_psi_prime: non-finite argument");
  const auto psi = hermite_psi_table(n, x);
  const double prev = n > 0 ? std::sqrt(2.0 * n) * psi[static_cast<std::size_t>(n) - 1] : 0.0;
  return prev - x * psi[static_cast<std::size_t>(n)];
}

}  // namespace lgq
