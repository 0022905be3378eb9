#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lgq/evaluate.hpp"
#include "lgq/fock_oracle.hpp"
#include "lgq/qpd_integral.hpp"
#include "lgq/qpd_series.hpp"
#include "lgq/scan.hpp"

using lgq::Complex;
constexpr double kPi = std::numbers::pi;

namespace {

const lgq::TruncationConfig kAccurate = lgq::TruncationConfig::accurate();

lgq::TruncationConfig plain(int n_max) {
  lgq::TruncationConfig t;
  t.n_max = n_max;
  return t;
}

double q_ser(const lgq::StateSpec& st, int s1, int s2, double t1, double t2,
             const lgq::MeasurementSpec& meas = lgq::MeasurementSpec::sign()) {
  return lgq::qpd_series(st, meas, s1, s2, t1, t2, kAccurate).value;
}

lgq::StateSpec random_state(std::mt19937_64& rng, double n_th = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = 2.0 * u(rng), ph = 2.0 * kPi * u(rng);
  return {std::polar(rad, ph), u(rng), 2.0 * kPi * u(rng), n_th};
}

}  // namespace

TEST(SeriesCoherent, SameTimeGroundState) {
  const lgq::StateSpec g{};
  EXPECT_NEAR(lgq::qpd_series_coherent(g, 1, 1, 0.7, 0.7).value, 0.5, 1e-14);
  EXPECT_NEAR(lgq::qpd_series_coherent(g, 1, -1, 0.7, 0.7).value, 0.0, 1e-14);
}

TEST(SeriesCoherent, MatchesFockOracle) {
  const auto st = lgq::StateSpec::from_phase_space(1.0, 1.0);
  const auto all = lgq::qpd_oracle_all(st, lgq::MeasurementSpec::sign(), 0.0, 1.0);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) EXPECT_NEAR(q_ser(st, s1, s2, 0.0, 1.0), all.at(s1, s2), 1e-6) << s1 << s2;
}

TEST(SeriesCoherent, RequiresCoherentState) {
  EXPECT_THROW(lgq::qpd_series_coherent(lgq::StateSpec{0.0, 0.1, 0.0, 0.0}, 1, 1, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(lgq::qpd_series_squeezed(lgq::StateSpec{0.0, 0.1, 0.0, 0.1}, 1, 1, 0.0, 1.0), std::invalid_argument);
}

TEST(SeriesCoherent, TableMinimumSecondRow) {
  const auto st = lgq::StateSpec::from_phase_space(0.55, 1.93);
  const auto m = lgq::minimize_over_t2([&](double t2) { return q_ser(st, -1, 1, 0.0, t2); }, lgq::T2Search{});
  EXPECT_NEAR(4.0 * m.q_min, -0.113, 0.003);
}

TEST(SeriesSqueezed, TableMinimumSqueezedRow) {
  const auto st = lgq::StateSpec::from_phase_space(-0.896, 1.18, 0.5, 0.0);
  const auto m = lgq::minimize_over_t2([&](double t2) { return q_ser(st, 1, -1, 0.0, t2); }, lgq::T2Search{});
  EXPECT_NEAR(4.0 * m.q_min, -0.113, 0.003);
}

TEST(SeriesSqueezed, ZeroSqueezingEqualsCoherent) {
  const auto st = lgq::StateSpec::from_phase_space(0.3, -1.1, 0.0, 1.7);
  for (double t2 : {0.5, 2.0, 4.4})
    EXPECT_EQ(lgq::qpd_series_squeezed(st, 1, -1, 0.2, t2).value, lgq::qpd_series_coherent(st, 1, -1, 0.2, t2).value);
}

TEST(SeriesSqueezed, CurveMatchesIntegralRoute) {
  const auto st = lgq::StateSpec::from_phase_space(0.55, 1.925, 1.0, kPi / 3.0);
  double worst = 0.0;
  for (int i = 0; i <= 125; ++i) {
    const double t2 = 0.05 * i;
    const double a = lgq::qpd_series_squeezed(st, 1, -1, 0.0, t2, plain(500)).value;
    const double b = lgq::qpd_integral(st, {}, 1, -1, 0.0, t2).value;
    worst = std::max(worst, std::abs(a - b));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(SeriesSqueezed, ReductionIdentity) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (int i = 0; i < 40; ++i) {
    const auto st = random_state(rng);
    const double t1 = u(rng), t2 = u(rng);
    const auto red = lgq::reduce_squeezed_to_coherent(st);
    const lgq::StateSpec coh{red.xi_prime, 0.0, 0.0, 0.0};
    for (int s1 : {1, -1})
      for (int s2 : {1, -1})
        EXPECT_NEAR(q_ser(st, s1, s2, t1, t2), q_ser(coh, s1, s2, red.time_map(t1), red.time_map(t2)), 1e-8);
  }
}

TEST(SeriesSqueezed, FixedTimeValuesUnderMappedAmplitude) {
  const Complex xi_c = Complex(0.9, 0.8) / std::sqrt(2.0);
  for (double t2 : {kPi / 2.0, kPi, 1.5 * kPi, 2.0 * kPi}) {
    const double ref = q_ser(lgq::StateSpec{xi_c, 0.0, 0.0, 0.0}, -1, 1, 0.0, t2);
    for (double r : {0.3, 0.7, 1.0}) {
      const lgq::StateSpec st{lgq::coherent_to_squeezed_amplitude(xi_c, r, 0.0), r, 0.0, 0.0};
      EXPECT_NEAR(q_ser(st, -1, 1, 0.0, t2), ref, 1e-8) << t2 << " " << r;
    }
  }
}

TEST(SeriesThermal, ZeroTemperatureLimit) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 10; ++i) {
    const auto st = random_state(rng);
    EXPECT_NEAR(lgq::qpd_series_thermal(st, 1, -1, 0.3, 2.1, kAccurate).value,
                lgq::qpd_series_squeezed(st, 1, -1, 0.3, 2.1, kAccurate).value, 1e-12);
  }
}

TEST(SeriesThermal, MatchesThermalFockOracle) {
  const auto st = lgq::StateSpec::from_phase_space(1.0, 1.0, 0.0, 0.0, lgq::n_th_from_temperature(0.5));
  const auto all = lgq::qpd_oracle_all(st, lgq::MeasurementSpec::sign(), 0.0, 2.0);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) EXPECT_NEAR(q_ser(st, s1, s2, 0.0, 2.0), all.at(s1, s2), 1e-6) << s1 << s2;
}

TEST(SeriesThermal, SqueezedThermalMatchesOracle) {
  const auto st = lgq::StateSpec::from_phase_space(-0.4, 0.9, 0.5, 1.0, 0.3);
  const auto all = lgq::qpd_oracle_all(st, lgq::MeasurementSpec::sign(), 0.4, 1.7);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) EXPECT_NEAR(q_ser(st, s1, s2, 0.4, 1.7), all.at(s1, s2), 1e-6) << s1 << s2;
}

TEST(SeriesThermal, ViolationWeakensWithTemperature) {
  auto grid_min = [](double temp) {
    double best = 1.0;
    const lgq::T2Search search{0.0, 2.0 * kPi, 60, 20};
    for (double x0 : {0.0, 0.5, 1.0, 1.5, 2.0})
      for (double p0 : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const auto st = lgq::StateSpec::from_phase_space(x0, p0, 0.5, 0.0, lgq::n_th_from_temperature(temp));
        const auto m = lgq::minimize_over_t2([&](double t2) { return q_ser(st, -1, 1, 0.0, t2); }, search);
        best = std::min(best, m.q_min);
      }
    return best;
  };
  const double cold = grid_min(0.0), warm = grid_min(1.0);
  EXPECT_LT(cold, 0.0);
  EXPECT_GT(warm, cold);
}

TEST(SeriesThermal, TruncationFailureIsFlagged) {
  auto t = plain(10);
  const auto st = lgq::StateSpec::from_phase_space(1.0, 1.0, 0.0, 0.0, 2.0);
  const auto r = lgq::qpd_series_thermal(st, 1, 1, 0.0, 1.0, t);
  EXPECT_FALSE(r.converged);
}

TEST(SeriesWindow, SameTimeDisjointRegions) {
  const lgq::StateSpec st{0.0, 0.4, 0.2, 0.0};
  EXPECT_NEAR(lgq::qpd_series_window(st, 1.0, 1, -1, 0.8, 0.8, kAccurate).value, 0.0, 1e-14);
}

TEST(SeriesWindow, MinimumAtOptimalHalfWidth) {
  const lgq::StateSpec st{};
  auto f = [&](double t2) { return lgq::qpd_series_window(st, 1.02, 1, 1, 0.0, t2, kAccurate).value; };
  const auto m = lgq::minimize_over_t2(f, lgq::T2Search{0.0, kPi, 200, 40});
  EXPECT_NEAR(m.q_min, -0.0538, 0.001);
  EXPECT_NEAR(m.t2_argmin, 1.55, 0.05);
}

TEST(SeriesWindow, MatchesFockOracle) {
  const lgq::StateSpec st{0.0, 0.3, 0.0, 0.0};
  const auto meas = lgq::MeasurementSpec::window(1.0);
  const auto all = lgq::qpd_oracle_all(st, meas, 0.0, 1.3);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) EXPECT_NEAR(q_ser(st, s1, s2, 0.0, 1.3, meas), all.at(s1, s2), 1e-6) << s1 << s2;
}

TEST(SeriesWindow, PeriodInSecondTime) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const lgq::StateSpec st{0.0, u(rng), 2.0 * kPi * u(rng), 0.0};
    const auto meas = lgq::MeasurementSpec::window(0.2 + 1.8 * u(rng));
    const double t1 = 2.0 * kPi * u(rng), t2 = 2.0 * kPi * u(rng);
    EXPECT_NEAR(q_ser(st, 1, 1, t1, t2, meas), q_ser(st, 1, 1, t1, t2 + kPi, meas), 1e-8);
  }
}

TEST(SeriesWindow, RequiresSqueezedVacuum) {
  EXPECT_THROW(lgq::qpd_series_window(lgq::StateSpec{Complex(0.1, 0.0), 0.0, 0.0, 0.0}, 1.0, 1, 1, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(lgq::qpd_series_window(lgq::StateSpec{}, 0.0, 1, 1, 0.0, 1.0), std::invalid_argument);
}

TEST(SeriesInvariants, NormalizationForEveryMeasurement) {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 30; ++i) {
    const double n_th = i % 3 == 0 ? 0.5 : 0.0;
    const auto st = random_state(rng, n_th);
    const double t1 = 0.3 * i, t2 = 0.17 * i + 0.5;
    double s = 0.0;
    for (int s1 : {1, -1})
      for (int s2 : {1, -1}) s += q_ser(st, s1, s2, t1, t2);
    EXPECT_NEAR(s, 1.0, 1e-8);
  }
}

TEST(SeriesInvariants, LudersFloor) {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 40; ++i) {
    const auto st = random_state(rng, i % 4 == 0 ? 1.0 : 0.0);
    for (int s1 : {1, -1})
      for (int s2 : {1, -1}) EXPECT_GE(q_ser(st, s1, s2, 0.1 * i, 0.37 * i + 0.2), -0.125 - 1e-6);
  }
}

TEST(TailEstimate, GeometricSequence) {
  std::vector<double> t;
  for (int n = 0; n < 40; ++n) t.push_back(std::pow(0.5, n));
  const double exact = std::pow(0.5, 40) / (1.0 - 0.5);
  const double bound = lgq::series_tail_estimate(t);
  EXPECT_GE(bound, exact);
  EXPECT_LE(bound, 4.0 * exact);
}

TEST(TailEstimate, ZeroTail) {
  std::vector<double> t(20, 0.0);
  t[0] = 1.0;
  t[3] = 0.2;
  EXPECT_EQ(lgq::series_tail_estimate(t), 0.0);
}

TEST(TailEstimate, NeedsEightTerms) {
  std::vector<double> t(7, 1.0);
  EXPECT_THROW(lgq::series_tail_estimate(t), std::invalid_argument);
}

TEST(TailEstimate, ConsistentWithObservedTruncationError) {
  const auto st = lgq::StateSpec::from_phase_space(0.55, 1.925, 1.0, kPi / 3.0);
  const auto r50 = lgq::qpd_series_squeezed(st, 1, -1, 0.0, 2.0, plain(50));
  const auto r500 = lgq::qpd_series_squeezed(st, 1, -1, 0.0, 2.0, plain(500));
  EXPECT_GE(r50.tail_bound, std::abs(r500.value - r50.value));
}
