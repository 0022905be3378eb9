#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lgq/qpd_integral.hpp"
#include "lgq/quadrature.hpp"
#include "lgq/special_functions.hpp"

using lgq::Complex;

namespace {

// Maclaurin series erf(x) = 2/sqrt(pi) sum (-1)^k x^(2k+1) / (k! (2k+1)).
double erf_maclaurin(double x) {
  double term = x, sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x * x / k;
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

// erfc(z) = 2/sqrt(pi) int_0^inf exp(-(z + s)^2) ds along the real ray from z.
Complex erfc_by_contour(Complex z) {
  const auto rule = lgq::composite_gauss_legendre(32, 0.0, 14.0, 56);
  Complex acc(0.0, 0.0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Complex t = z + rule.nodes[i];
    acc += rule.weights[i] * std::exp(-t * t);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * acc;
}

// psi_7 from the explicit polynomial H_7 = 128x^7 - 1344x^5 + 3360x^3 - 1680x.
double psi7_exact(double x) {
  const double h7 = ((128.0 * x * x - 1344.0) * x * x + 3360.0) * x * x * x - 1680.0 * x;
  const double norm = 1.0 / std::sqrt(std::pow(2.0, 7) * 5040.0 * std::sqrt(std::numbers::pi));
  return norm * h7 * std::exp(-0.5 * x * x);
}

}  // namespace

TEST(ErfReal, ZeroAndOddness) {
  EXPECT_EQ(lgq::erf_real(0.0), 0.0);
  EXPECT_DOUBLE_EQ(lgq::erf_real(0.7), -lgq::erf_real(-0.7));
}

TEST(ErfReal, MatchesMaclaurinOracle) {
  EXPECT_NEAR(lgq::erf_real(1.0), erf_maclaurin(1.0), 1e-15);
  EXPECT_NEAR(lgq::erf_real(1.0), 0.8427007929497149, 1e-15);
  for (double x : {0.1, 0.5, 1.7, 2.5}) EXPECT_NEAR(lgq::erf_real(x), erf_maclaurin(x), 1e-13) << x;
}

TEST(ErfReal, BoundedAndMonotone) {
  double prev = -1.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double v = lgq::erf_real(x);
    EXPECT_LE(std::abs(v), 1.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(ErfcComplex, SimpleValues) {
  const Complex z0 = lgq::erfc_complex(Complex(0.0, 0.0));
  EXPECT_NEAR(z0.real(), 1.0, 1e-15);
  EXPECT_NEAR(z0.imag(), 0.0, 1e-15);
  const Complex one = lgq::erfc_complex(Complex(1.0, 0.0));
  EXPECT_NEAR(one.real(), 1.0 - lgq::erf_real(1.0), 1e-15);
  EXPECT_NEAR(one.real(), 0.1572992070502851, 1e-15);
  EXPECT_NEAR(one.imag(), 0.0, 1e-15);
}

TEST(ErfcComplex, MatchesContourQuadrature) {
  for (Complex z : {Complex(1.0, 1.0), Complex(0.3, -2.0), Complex(2.5, 0.7), Complex(0.0, 3.0)}) {
    const Complex ref = erfc_by_contour(z);
    const Complex got = lgq::erfc_complex(z);
    EXPECT_NEAR(got.real(), ref.real(), 1e-12 * std::max(1.0, std::abs(ref))) << z;
    EXPECT_NEAR(got.imag(), ref.imag(), 1e-12 * std::max(1.0, std::abs(ref))) << z;
  }
}

TEST(ErfcComplex, ReflectionAndConjugateSymmetry) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  int tested = 0;
  while (tested < 1000) {
    const Complex z(u(rng), u(rng));
    if (std::abs(z) > 5.0) continue;
    ++tested;
    const Complex a = lgq::erfc_complex(z);
    const Complex b = lgq::erfc_complex(std::conj(z));
    const double scale = std::max(1.0, std::abs(a));
    EXPECT_NEAR(b.real(), a.real(), 1e-13 * scale);
    EXPECT_NEAR(b.imag(), -a.imag(), 1e-13 * scale);
    const Complex c = lgq::erfc_complex(-z);
    EXPECT_NEAR((a + c).real(), 2.0, 1e-12 * scale);
    EXPECT_NEAR((a + c).imag(), 0.0, 1e-12 * scale);
  }
}

TEST(ErfcComplex, OverflowIsReportedNotInfinite) {
  const Complex z(-10.0, 30.0);  // exp(-z^2) = exp(800 + ...) overflows
  try {
    const Complex v = lgq::erfc_complex(z);
    EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  } catch (const lgq::NumericalOverflow&) {
    SUCCEED();
  }
}

TEST(ErfcxComplex, ScaledFormStaysFiniteInUpperRegion) {
  const Complex v = lgq::erfcx_complex(Complex(30.0, 5.0));
  EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  // erfcx(z) ~ 1/(sqrt(pi) z) for large |z|.
  const Complex approx = 1.0 / (std::sqrt(std::numbers::pi) * Complex(30.0, 5.0));
  EXPECT_LT(std::abs(v - approx), 1e-3 * std::abs(approx));
}

TEST(HermitePsi, KnownValues) {
  EXPECT_NEAR(lgq::hermite_psi(0, 0.0), std::pow(std::numbers::pi, -0.25), 1e-15);
  EXPECT_NEAR(lgq::hermite_psi(0, 0.0), 0.7511255444649425, 1e-15);
  EXPECT_EQ(lgq::hermite_psi(1, 0.0), 0.0);
  EXPECT_NEAR(lgq::hermite_psi(7, 1.3), psi7_exact(1.3), 1e-14);
}

TEST(HermitePsi, IndexCapIsEnforced) {
  EXPECT_NO_THROW(lgq::hermite_psi(512, 0.3));
  EXPECT_THROW(lgq::hermite_psi(513, 0.3), lgq::CapabilityError);
  EXPECT_THROW(lgq::hermite_psi_prime(513, 0.3), lgq::CapabilityError);
}

TEST(HermitePsi, Orthonormal) {
  const int nmax = 40;
  const auto rule = lgq::composite_gauss_legendre(32, -12.0, 12.0, 48);
  std::vector<std::vector<double>> tab;
  for (std::size_t i = 0; i < rule.size(); ++i) tab.push_back(lgq::hermite_psi_table(nmax, rule.nodes[i]));
  for (int m = 0; m <= nmax; ++m)
    for (int n = 0; n <= nmax; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * tab[i][m] * tab[i][n];
      EXPECT_NEAR(s, m == n ? 1.0 : 0.0, 1e-9) << m << "," << n;
    }
}

TEST(HermitePsi, DerivativeMatchesFiniteDifference) {
  const double h = 1e-5;
  for (int n = 0; n <= 40; ++n)
    for (double x = -6.0; x <= 6.0; x += 0.37) {
      const double fd = (lgq::hermite_psi(n, x + h) - lgq::hermite_psi(n, x - h)) / (2.0 * h);
      const double d = lgq::hermite_psi_prime(n, x);
      EXPECT_NEAR(d, fd, 1e-6 * std::max(1.0, std::abs(d))) << n << " " << x;
    }
}

TEST(HermitePsi, TableMatchesPointwise) {
  const auto tab = lgq::hermite_psi_table(300, -2.2);
  for (int n : {0, 5, 99, 300}) EXPECT_DOUBLE_EQ(tab[n], lgq::hermite_psi(n, -2.2, 1024));
}

TEST(GaussLegendre, Exactness) {
  const auto r2 = lgq::gauss_legendre(2, -1.0, 1.0);
  EXPECT_NEAR(r2.apply([](double x) { return x * x; }), 2.0 / 3.0, 1e-15);
  const auto r16 = lgq::gauss_legendre(16, 0.0, std::numbers::pi / 2.0);
  EXPECT_NEAR(r16.apply([](double x) { return std::sin(x); }), 1.0, 1e-12);
  const auto r5 = lgq::gauss_legendre(5, 0.0, 2.0);
  EXPECT_NEAR(r5.apply([](double x) { return std::pow(x, 9); }), 102.4, 1e-12);
}

TEST(GaussLegendre, WeightsSumToLength) {
  for (int order : {1, 3, 8, 24, 64}) {
    const auto r = lgq::gauss_legendre(order, -0.5, 2.25);
    ASSERT_EQ(r.nodes.size(), r.weights.size());
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 2.75, 1e-12) << order;
  }
}

TEST(GaussLegendre, RejectsBadInput) {
  EXPECT_THROW(lgq::gauss_legendre(0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(lgq::gauss_legendre(4, 0.0, std::numeric_limits<double>::infinity()), std::domain_error);
}

// The u-integrand of the integral route at a fixed parameter point is
// smooth: order 32 and order 64 agree.
TEST(GaussLegendre, IntegralRouteIntegrandSelfConvergence) {
  const auto st = lgq::StateSpec::from_phase_space(0.55, 1.925, 1.0, std::numbers::pi / 3.0);
  const auto f = lgq::make_quad_form(st, {}, 1, -1, 0.0, 2.0);
  auto g = [&](double u) { return lgq::c_integral_closed(f.sigma(u), f.beta_quad(u), f.delta); };
  const auto r32 = lgq::gauss_legendre(32, 0.0, std::numbers::pi / 2.0);
  const auto r64 = lgq::gauss_legendre(64, 0.0, std::numbers::pi / 2.0);
  Complex a(0, 0), b(0, 0);
  for (std::size_t i = 0; i < r32.size(); ++i) a += r32.weights[i] * g(r32.nodes[i]);
  for (std::size_t i = 0; i < r64.size(); ++i) b += r64.weights[i] * g(r64.nodes[i]);
  EXPECT_LT(std::abs(a - b), 1e-10);
}

TEST(AdaptiveQuadrature, ResolvesPeakedIntegrand) {
  auto f = [](double x) { return 1e-3 / (1e-6 + (x - 0.3) * (x - 0.3)); };
  const auto r = lgq::integrate_adaptive(f, 0.0, 1.0, 1e-10);
  const double exact = (std::atan(0.7 / 1e-3) + std::atan(0.3 / 1e-3));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, exact, 1e-9);
}
