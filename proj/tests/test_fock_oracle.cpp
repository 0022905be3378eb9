#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "lgq/fock_oracle.hpp"
#include "lgq/qpd_integral.hpp"
#include "lgq/qpd_series.hpp"
#include "lgq/verify.hpp"

using lgq::Complex;
constexpr double kPi = std::numbers::pi;

namespace {

// Sign projector whose cut sits at dimensionless position a.
lgq::MeasurementSpec sign_at(double a) { return lgq::MeasurementSpec::sign({0.0, 0.0, std::numbers::sqrt2 * a}); }

}  // namespace

// Offsets must be finite; a cut this far out leaves no weight on any of the first 40 levels.
TEST(ProjectorMatrix, FarLeftCutIsIdentity) {
  const auto P = lgq::projector_matrix(sign_at(-40.0), 0.0, 40);
  EXPECT_LT((P.entries - Eigen::MatrixXcd::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProjectorMatrix, WindowOutcomesSumToIdentity) {
  const auto meas = lgq::MeasurementSpec::window(1.02);
  const auto Pp = lgq::projector_matrix(meas, 0.7, 80, 1);
  const auto Pm = lgq::projector_matrix(meas, 0.7, 80, -1);
  EXPECT_LT((Pp.entries + Pm.entries - Eigen::MatrixXcd::Identity(80, 80)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ProjectorMatrix, GroundFirstExcitedEntry) {
  const auto P = lgq::projector_matrix(sign_at(0.0), 0.0, 50);
  EXPECT_NEAR(P.entries(0, 1).real(), 1.0 / std::sqrt(2.0 * kPi), 1e-12);
  EXPECT_NEAR(P.entries(0, 1).imag(), 0.0, 1e-15);
}

TEST(ProjectorMatrix, MatchesClosedFormMatrixElements) {
  for (double a : {-2.1, -0.4, 0.0, 1.3, 2.9}) {
    const auto P = lgq::projector_matrix(sign_at(a), 0.0, 120);
    const auto J = lgq::build_jtable(a, 119);
    double worst = 0.0;
    for (int m = 0; m < 120; ++m)
      for (int n = 0; n < 120; ++n) worst = std::max(worst, std::abs(P.entries(m, n) - J(m, n)));
    EXPECT_LT(worst, 1e-9) << a;
    EXPECT_LT(P.hermiticity_defect(), 1e-14);
  }
}

TEST(ProjectorMatrix, EigenvaluesInUnitInterval) {
  const auto P = lgq::projector_matrix(sign_at(0.8), 1.1, 200);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P.entries);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-8);
}

TEST(ProjectorMatrix, IdempotentInTruncation) {
  for (double a : {-3.0, -1.5, 0.0, 0.7, 3.0}) {
    const auto P = lgq::projector_matrix(sign_at(a), 0.0, 400);
    const Eigen::MatrixXcd d = P.entries * P.entries - P.entries;
    EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-6) << a;
  }
}

TEST(RhoFock, GroundState) {
  const auto rho = lgq::rho_fock(lgq::StateSpec{}, 30);
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(30, 30);
  ref(0, 0) = 1.0;
  EXPECT_LT((rho.entries - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RhoFock, CoherentMean) {
  const auto rho = lgq::rho_fock(lgq::StateSpec{Complex(1.0, 0.0), 0.0, 0.0, 0.0}, 100);
  const Complex a = lgq::annihilation_expectation(rho);
  EXPECT_NEAR(a.real(), 1.0, 1e-9);
  EXPECT_NEAR(a.imag(), 0.0, 1e-9);
}

// <a> equals xi for D(xi) S(zeta)|0>; the state vector also equals
// S(zeta) D(gamma)|0> with gamma from the interchange relation.
TEST(RhoFock, SqueezedMeanAgreesWithInterchange) {
  const lgq::StateSpec st{Complex(0.389, 1.361), 1.0, kPi / 3.0, 0.0};
  const auto rho = lgq::rho_fock(st, 300);
  const Complex a = lgq::annihilation_expectation(rho);
  EXPECT_NEAR(a.real(), st.xi.real(), 1e-9);
  EXPECT_NEAR(a.imag(), st.xi.imag(), 1e-9);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(300, 1);
  v(0, 0) = 1.0;
  lgq::detail::apply_displacement(lgq::gamma_from(st.xi, st.r, st.theta0), v);
  lgq::detail::apply_squeeze(st.r, st.theta0, v);
  const Eigen::MatrixXcd pure = v * v.adjoint();
  EXPECT_LT((pure - rho.entries).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RhoFock, HermitianPositiveUnitTrace) {
  for (const auto& st : {lgq::StateSpec{Complex(1.2, -0.7), 0.8, 2.0, 0.0}, lgq::StateSpec{Complex(-0.5, 0.3), 0.4, 0.3, 1.0}}) {
    const auto rho = lgq::rho_fock(st, 300);
    EXPECT_LT(rho.hermiticity_defect(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    const double tr = rho.entries.trace().real();
    EXPECT_GE(tr, 1.0 - 1e-8);
    EXPECT_LE(tr, 1.0 + 1e-12);
  }
}

TEST(RhoFock, TraceDeficitIsReported) {
  EXPECT_THROW(lgq::rho_fock(lgq::StateSpec{Complex(6.0, 0.0), 1.5, 0.0, 0.0}, 20), lgq::TraceDeficitError);
}

TEST(QpdOracle, GroundStateSameTime) {
  EXPECT_NEAR(lgq::qpd_oracle(lgq::StateSpec{}, lgq::MeasurementSpec::sign(), 1, 1, 0.4, 0.4), 0.5, 1e-12);
}

TEST(QpdOracle, ThreeWayAgreementAtReferencePoint) {
  const auto st = lgq::verify::fig1_state();
  lgq::OracleConfig cfg;
  cfg.dim = 400;
  const auto all = lgq::qpd_oracle_all(st, lgq::MeasurementSpec::sign(), 0.0, 2.0, cfg);
  const double series = lgq::qpd_series_squeezed(st, 1, -1, 0.0, 2.0, lgq::TruncationConfig::accurate()).value;
  const double integral = lgq::qpd_integral(st, {}, 1, -1, 0.0, 2.0).value;
  EXPECT_NEAR(all.at(1, -1), series, 1e-5);
  EXPECT_NEAR(all.at(1, -1), integral, 1e-5);
}

TEST(QpdOracle, HotThermalAgreesWithSeries) {
  const auto st = lgq::StateSpec::from_phase_space(0.7, -0.4, 0.3, 1.2, lgq::n_th_from_temperature(2.0));
  const auto all = lgq::qpd_oracle_all(st, lgq::MeasurementSpec::sign(), 0.9, 2.6);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1})
      EXPECT_NEAR(all.at(s1, s2),
                  lgq::qpd_series_thermal(st, s1, s2, 0.9, 2.6, lgq::TruncationConfig::accurate()).value, 1e-5);
}

TEST(QpdOracle, Normalization) {
  for (const auto& p : lgq::verify::battery(30)) {
    const auto all = lgq::qpd_oracle_all(p.state, p.meas, p.t1, p.t2);
    EXPECT_NEAR(all.at(1, 1) + all.at(1, -1) + all.at(-1, 1) + all.at(-1, -1), 1.0, 1e-9);
  }
}

TEST(QpdOracle, DimensionDoublingOnBattery) {
  lgq::OracleConfig lo, hi;
  lo.dim = 200;
  hi.dim = 400;
  double worst = 0.0;
  int failures = 0;
  for (const auto& p : lgq::verify::battery()) {
    try {
      const double a = lgq::qpd_oracle(p.state, p.meas, p.s1, p.s2, p.t1, p.t2, lo);
      const double b = lgq::qpd_oracle(p.state, p.meas, p.s1, p.s2, p.t1, p.t2, hi);
      worst = std::max(worst, std::abs(a - b));
    } catch (const lgq::TraceDeficitError&) {
      ++failures;
    }
  }
  EXPECT_EQ(failures, 0);
  EXPECT_LT(worst, 1e-6);
}

TEST(QpdOracle, RejectsOversizedBasis) {
  lgq::OracleConfig cfg;
  cfg.dim = 700;
  EXPECT_THROW(lgq::qpd_oracle(lgq::StateSpec{}, lgq::MeasurementSpec::sign(), 1, 1, 0.0, 1.0, cfg), lgq::CapabilityError);
}
