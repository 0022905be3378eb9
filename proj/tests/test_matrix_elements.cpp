#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "lgq/matrix_elements.hpp"
#include "lgq/quadrature.hpp"
#include "lgq/special_functions.hpp"

using lgq::kInf;

namespace {

// Direct quadrature of psi_m psi_n on [a, a + 40].
double overlap_quadrature(int m, int n, double a) {
  const auto rule = lgq::composite_gauss_legendre(32, a, a + 40.0, 200);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto psi = lgq::hermite_psi_table(std::max(m, n), rule.nodes[i]);
    s += rule.weights[i] * psi[m] * psi[n];
  }
  return s;
}

}  // namespace

TEST(JOffdiag, FullLineOrthogonality) { EXPECT_EQ(lgq::j_offdiag(0, 1, -kInf, kInf), 0.0); }

TEST(JOffdiag, HalfLineGroundFirstExcited) {
  EXPECT_NEAR(lgq::j_offdiag(0, 1, 0.0, kInf), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(lgq::j_offdiag(0, 1, 0.0, kInf), overlap_quadrature(0, 1, 0.0), 1e-13);
}

TEST(JOffdiag, MatchesQuadratureOracle) {
  EXPECT_NEAR(lgq::j_offdiag(3, 7, -0.8, kInf), overlap_quadrature(3, 7, -0.8), 1e-10);
  for (auto [m, n, a] : {std::tuple{2, 5, 0.4}, std::tuple{10, 11, -1.7}, std::tuple{0, 30, 2.2}})
    EXPECT_NEAR(lgq::j_offdiag(m, n, a, kInf), overlap_quadrature(m, n, a), 1e-10) << m << " " << n;
}

TEST(JOffdiag, SymmetricAndFiniteInterval) {
  EXPECT_NEAR(lgq::j_offdiag(3, 7, -0.8, 1.3), lgq::j_offdiag(7, 3, -0.8, 1.3), 1e-15);
  EXPECT_NEAR(lgq::j_offdiag(3, 7, -0.8, 1.3),
              overlap_quadrature(3, 7, -0.8) - overlap_quadrature(3, 7, 1.3), 1e-10);
}

TEST(JOffdiag, Errors) {
  EXPECT_THROW(lgq::j_offdiag(2, 2, 0.0, kInf), std::domain_error);
  EXPECT_THROW(lgq::j_offdiag(2, 3, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(lgq::j_offdiag(2, 600, 0.0, kInf), lgq::CapabilityError);
}

TEST(JDiag, GroundStateClosedForm) { EXPECT_NEAR(lgq::j_diag(0, 0.3), 0.5 * (1.0 - std::erf(0.3)), 1e-16); }

TEST(JDiag, HalfAtOrigin) {
  for (int n : {0, 1, 4, 17, 100}) EXPECT_NEAR(lgq::j_diag(n, 0.0), 0.5, 1e-12) << n;
}

TEST(JDiag, MatchesAdaptiveQuadrature) {
  auto f = [](double x) {
    const double p = lgq::hermite_psi(4, x);
    return p * p;
  };
  const auto ref = lgq::integrate_adaptive(f, 1.1, 40.0, 1e-13);
  ASSERT_TRUE(ref.converged);
  EXPECT_NEAR(lgq::j_diag(4, 1.1), ref.value, 1e-10);
}

TEST(JDiag, LimitsBoundsAndMonotone) {
  for (int n : {0, 3, 20}) {
    EXPECT_EQ(lgq::j_diag(n, -kInf), 1.0);
    EXPECT_EQ(lgq::j_diag(n, kInf), 0.0);
    double prev = 1.0;
    for (double x = -8.0; x <= 8.0; x += 0.05) {
      const double v = lgq::j_diag(n, x);
      EXPECT_GE(v, -1e-15);
      EXPECT_LE(v, 1.0 + 1e-15);
      EXPECT_LE(v, prev + 1e-13);
      prev = v;
    }
  }
}

TEST(BuildJTable, SmallTableEntries) {
  const auto t = lgq::build_jtable(0.0, 2);
  EXPECT_NEAR(t.at(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(t.at(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(t.at(0, 1), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(t.at(0, 2), lgq::j_offdiag(0, 2, 0.0, kInf), 1e-15);
  EXPECT_EQ(t.max_index(), 2);
}

TEST(BuildJTable, FullLineIsIdentity) {
  const auto t = lgq::build_jtable(-kInf, 3);
  for (int m = 0; m <= 3; ++m)
    for (int n = 0; n <= 3; ++n) EXPECT_EQ(t.at(m, n), m == n ? 1.0 : 0.0);
}

TEST(BuildJTable, SymmetricAndMatchesPointwise) {
  const auto t = lgq::build_jtable(-0.37, 60);
  for (int m = 0; m <= 60; ++m)
    for (int n = 0; n <= 60; ++n) {
      EXPECT_NEAR(t(m, n), t(n, m), 1e-12);
      if (m != n && (m == 0 || n == 0)) {
        EXPECT_NEAR(t(m, n), lgq::j_offdiag(m, n, -0.37, kInf), 1e-14);
      }
    }
}

TEST(BuildJTable, CapIsEnforced) {
  EXPECT_THROW(lgq::build_jtable(0.0, 513), lgq::CapabilityError);
  EXPECT_THROW(lgq::build_jtable(0.0, 100, 50), lgq::CapabilityError);
}

TEST(BuildJTable, LargeTableBuildsQuickly) {
  const auto start = std::chrono::steady_clock::now();
  const auto t = lgq::build_jtable(1.03, 500);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 5.0);
  EXPECT_LE(t.entries.size() * sizeof(double), std::size_t{4} << 20);
  EXPECT_NEAR(t(0, 0), 0.5 * std::erfc(1.03), 1e-15);
}

TEST(JTableProperties, ComplementRule) {
  for (double a : {-1.4, 0.0, 0.65, 2.3}) {
    const auto lo = lgq::region_matrix(lgq::sign_region(-1, a), 40, 40);
    const auto hi = lgq::region_matrix(lgq::sign_region(1, a), 40, 40);
    for (int m = 0; m <= 40; ++m)
      for (int n = 0; n <= 40; ++n) EXPECT_NEAR(lo(m, n) + hi(m, n), m == n ? 1.0 : 0.0, 1e-12);
    // Off-diagonal lower half-line from the Wronskian form directly.
    for (int n = 1; n <= 40; ++n) EXPECT_NEAR(lo(0, n), lgq::j_offdiag(0, n, -kInf, a), 1e-14);
  }
}

TEST(JTableProperties, CompletenessInTruncatedBasis) {
  const double a = 0.42;
  const auto t = lgq::build_jtable(a, 300);
  for (int m = 0; m <= 10; ++m)
    for (int n = 0; n <= 10; ++n) {
      double s = 0.0;
      for (int k = 0; k <= 300; ++k) s += t(m, k) * t(k, n);
      EXPECT_NEAR(s, t(m, n), 1e-6) << m << "," << n;
    }
}

TEST(JTableCache, ReusesTablesAndReturnsSameValues) {
  lgq::JTableCache cache;
  const auto a = cache.get(0.3, 20, 20);
  const auto b = cache.get(0.3, 20, 20);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 1u);
  const auto direct = lgq::build_jtable(0.3, 20);
  EXPECT_EQ(a->entries, direct.entries);
  cache.clear();
  const auto c = cache.get(0.3, 20, 20);
  EXPECT_EQ(c->entries, direct.entries);
  EXPECT_EQ(cache.misses(), 2u);
}

TEST(JTableCache, EvictsWhenOverBudget) {
  lgq::JTableCache cache(1000);  // smaller than any 20x20 table
  const auto a = cache.get(0.1, 19, 19);
  const auto b = cache.get(0.2, 19, 19);
  EXPECT_EQ(a->entries, lgq::build_jtable(0.1, 19).entries);
  EXPECT_EQ(b->entries, lgq::build_jtable(0.2, 19).entries);
}

TEST(Regions, SetOperations) {
  const auto w = lgq::window_region(1, -1.0, 1.0);
  ASSERT_EQ(w.size(), 2u);
  const auto i = lgq::intersect(w, lgq::sign_region(1, 0.5));
  ASSERT_EQ(i.size(), 1u);
  EXPECT_EQ(i[0].lo, 1.0);
  EXPECT_EQ(i[0].hi, kInf);
  const auto r = lgq::reflect(lgq::sign_region(1, 0.5));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].lo, -kInf);
  EXPECT_EQ(r[0].hi, -0.5);
  const auto s = lgq::rescale(lgq::window_region(-1, -1.0, 1.0), 0.5, 2.0);
  EXPECT_DOUBLE_EQ(s[0].lo, -0.75);
  EXPECT_DOUBLE_EQ(s[0].hi, 0.25);
  EXPECT_THROW(lgq::window_region(1, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(lgq::sign_region(0, 1.0), std::invalid_argument);
}

TEST(Regions, RowAndDiagonalMatchFullMatrix) {
  const auto reg = lgq::window_region(-1, -0.7, 1.1);
  const auto full = lgq::region_matrix(reg, 30, 30);
  const auto row = lgq::region_row0(reg, 30);
  const auto diag = lgq::region_diag(reg, 30);
  for (int n = 0; n <= 30; ++n) {
    EXPECT_NEAR(row[n], full(0, n), 1e-14);
    EXPECT_NEAR(diag[n], full(n, n), 1e-14);
  }
}
