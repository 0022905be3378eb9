#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "lgq/matrix_elements.hpp"
#include "lgq/measurement.hpp"
#include "lgq/states.hpp"

namespace lgq {

/// Plain: partial sum up to n_max. Smoothed: the n-th term is weighted by a
/// spectral taper that is 1 for n <= n_max/4 and decays smoothly to ~e^-36
/// at n_max. The taper suppresses the truncation ripple of the slowly
/// (n^-3/2) decaying, oscillating terms; see spectral_taper.
enum class Summation { Plain, Smoothed };

struct TruncationConfig {
  int n_max = 200;
  double tail_tol = 1e-8;
  int m_max = -1;  // thermal sum cap; negative selects the weight floor below
  double weight_floor = 1e-12;
  Summation summation = Summation::Plain;

  /// Setting used by scans and cross-route checks.
  static TruncationConfig accurate(int n_max = 4096) {
    TruncationConfig t;
    t.n_max = n_max;
    t.summation = Summation::Smoothed;
    return t;
  }

  void validate() const {
    if (n_max < 1) throw std::invalid_argument("TruncationConfig: n_max must be >= 1");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("TruncationConfig: tail_tol must be > 0");
    if (!(weight_floor > 0.0 && weight_floor < 1.0)) throw std::invalid_argument("TruncationConfig: bad weight_floor");
    if (summation == Summation::Smoothed && n_max < 16)
      throw std::invalid_argument("TruncationConfig: smoothed summation needs n_max >= 16");
  }

  int thermal_m_max(double n_th) const {
    if (n_th == 0.0) return 0;
    return m_max >= 0 ? m_max : thermal_cutoff(n_th, weight_floor);
  }
};

struct SeriesResult {
  double value = 0.0;
  double tail_bound = 0.0;  // plain: series_tail_estimate; smoothed: |S(N) - S(N/2)|
  int n_terms = 0;
  int m_terms = 1;
  bool converged = false;
  bool collapsed = false;  // exact coincidence handled by region intersection
};

/// Taper f(n/N): 1 up to N/4, then exp(-36 y^6) with y = (n/N - 1/4) / (3/4).
inline double spectral_taper(int n, int n_max) {
  const double x = static_cast<double>(n) / n_max;
  if (x <= 0.25) return 1.0;
  const double y = (x - 0.25) / 0.75;
  const double y3 = y * y * y;
  return std::exp(-36.0 * y3 * y3);
}

/// Conservative bound on the omitted tail of sum(terms) from the envelope
/// e_n = max_{k >= n} |t_k| over the second half of the terms. Geometric
/// (log e linear in n) and power-law (log e linear in log n) models are both
/// fitted and the one with the smaller residual is extrapolated; the power
/// tail is integrated from N. Returns +inf when the fitted envelope does not
/// decay fast enough to be summable.
inline double series_tail_estimate(std::span<const double> terms) {
  if (terms.size() < 8) throw std::invalid_argument("series_tail_estimate: needs at least 8 terms");
  const std::size_t n = terms.size();
  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    run = std::max(run, std::abs(terms[k]));
    env[k] = run;
  }
  if (env[n / 2] == 0.0) return 0.0;

  std::vector<double> xs_lin, xs_log, ys;
  for (std::size_t k = n / 2; k < n; ++k) {
    if (env[k] <= 0.0) break;
    const double idx = static_cast<double>(k + 1);
    xs_lin.push_back(idx);
    xs_log.push_back(std::log(idx));
    ys.push_back(std::log(env[k]));
  }
  if (ys.size() < 2) return 0.0;
  auto fit = [&](const std::vector<double>& xs, double& slope, double& icpt) {
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double den = m * sxx - sx * sx;
    slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    icpt = (sy - slope * sx) / m;
    double res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = ys[i] - (icpt + slope * xs[i]);
      res += d * d;
    }
    return res;
  };
  double g_slope, g_icpt, p_slope, p_icpt;
  const double g_res = fit(xs_lin, g_slope, g_icpt);
  const double p_res = fit(xs_log, p_slope, p_icpt);
  const double big_n = static_cast<double>(n);
  const double e_last = env[n - 1];
  constexpr double safety = 1.05;

  if (g_res <= p_res) {
    const double ratio = std::exp(g_slope);
    if (!(ratio < 1.0)) return std::numeric_limits<double>::infinity();
    return safety * e_last * ratio / (1.0 - ratio);
  }
  const double p = -p_slope;
  if (!(p > 1.0)) return std::numeric_limits<double>::infinity();
  // sum_{k > N} C k^-p <= C N^{1-p} / (p - 1), anchored at e_N = C N^-p.
  return safety * e_last * big_n / (p - 1.0);
}

namespace detail {

struct SeriesFrame {
  Region r1, r2;  // regions in the rescaled frame at t1, t2
  double delta;   // phase w (t2 - t1) + beta(t2) - beta(t1)
};

inline SeriesFrame series_frame(const StateSpec& state, const MeasurementSpec& meas, int s1, int s2, double t1,
                                double t2, const UnitsConfig& units) {
  const double lam1 = lambda_of(t1, state.r, state.theta0, units);
  const double lam2 = lambda_of(t2, state.r, state.theta0, units);
  const double x1 = x_xi_of(t1, state.xi, units);
  const double x2 = x_xi_of(t2, state.xi, units);
  SeriesFrame f;
  f.r1 = normalize_region(rescale(meas.region(s1, t1, units), x1, lam1));
  f.r2 = normalize_region(rescale(meas.region(s2, t2, units), x2, lam2));
  f.delta = units.omega * (t2 - t1) + phase_beta_of(t2, state.r, state.theta0, units) -
            phase_beta_of(t1, state.r, state.theta0, units);
  return f;
}

// 0 when delta is an exact multiple of 2 pi, 1 for an odd multiple of pi,
// -1 otherwise.
inline int coincidence_class(double delta) {
  constexpr double eps = 1e-13;
  const double scale = std::max(1.0, std::abs(delta)) * eps;
  const double r2 = std::remainder(delta, 2.0 * std::numbers::pi);
  if (std::abs(r2) <= scale) return 0;
  if (std::abs(std::abs(r2) - std::numbers::pi) <= scale) return 1;
  return -1;
}

inline std::vector<double> thermal_weights(double n_th, int m_max) {
  std::vector<double> w(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) w[static_cast<std::size_t>(m)] = thermal_weight(m, n_th);
  return w;
}

}  // namespace detail

/// General series evaluator, q = sum_m w_m sum_n cos((m - n) Delta) M2_mn M1_nm,
/// where M_i are the region matrices in the frame in which the squeezed,
/// displaced state becomes the thermal number-state mixture.
inline SeriesResult qpd_series(const StateSpec& state, const MeasurementSpec& meas, int s1, int s2, double t1, double t2,
                               const TruncationConfig& trunc = {}, const UnitsConfig& units = {}) {
  state.validate();
  meas.validate();
  trunc.validate();
  units.validate();
  validate_outcomes(s1, s2);
  if (!std::isfinite(t1) || !std::isfinite(t2)) throw std::invalid_argument("qpd_series: non-finite time");

  const auto frame = detail::series_frame(state, meas, s1, s2, t1, t2, units);
  const int m_max = trunc.thermal_m_max(state.n_th);
  const auto w = detail::thermal_weights(state.n_th, m_max);

  SeriesResult res;
  res.m_terms = m_max + 1;

  const int cls = detail::coincidence_class(frame.delta);
  if (cls >= 0) {
    // P2 e^{-i Delta N} P1 collapses onto a single region (parity for Delta = pi).
    const Region joint = cls == 0 ? intersect(frame.r1, frame.r2) : intersect(frame.r2, reflect(frame.r1));
    const auto diag = region_diag(joint, m_max);
    for (int m = 0; m <= m_max; ++m) res.value += w[static_cast<std::size_t>(m)] * diag[static_cast<std::size_t>(m)];
    res.collapsed = true;
    res.converged = true;
    return res;
  }

  int n_max = trunc.n_max;
  if (trunc.summation == Summation::Smoothed) n_max = std::max(n_max, 4 * (m_max + 1));
  res.n_terms = n_max;

  // terms[n] aggregates every contribution with intermediate index n.
  std::vector<double> terms(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (m_max == 0) {
    const auto a = region_row0(frame.r1, n_max);
    const auto b = region_row0(frame.r2, n_max);
    terms[0] = a[0] * b[0];
    for (int n = 1; n <= n_max; ++n) {
      const auto k = static_cast<std::size_t>(n);
      terms[k] = std::cos(n * frame.delta) * a[k] * b[k];
    }
  } else {
    const JTable m1 = region_matrix(frame.r1, m_max, n_max, &jtable_cache());
    const JTable m2 = region_matrix(frame.r2, m_max, n_max, &jtable_cache());
    std::vector<double> cosk(static_cast<std::size_t>(n_max) + 1);
    for (int k = 0; k <= n_max; ++k) cosk[static_cast<std::size_t>(k)] = std::cos(k * frame.delta);
    for (int m = 0; m <= m_max; ++m) {
      const double wm = w[static_cast<std::size_t>(m)];
      for (int n = 0; n <= n_max; ++n)
        terms[static_cast<std::size_t>(n)] += wm * cosk[static_cast<std::size_t>(std::abs(m - n))] * m1(m, n) * m2(m, n);
    }
  }

  if (trunc.summation == Summation::Plain) {
    for (double t : terms) res.value += t;
    const std::size_t first = static_cast<std::size_t>(m_max) + 1;
    res.tail_bound = terms.size() >= first + 8 ? series_tail_estimate(std::span<const double>(terms).subspan(first))
                                               : std::numeric_limits<double>::infinity();
  } else {
    const int half = n_max / 2;
    double full = 0.0, coarse = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const double t = terms[static_cast<std::size_t>(n)];
      full += spectral_taper(n, n_max) * t;
      if (n <= half) coarse += spectral_taper(n, half) * t;
    }
    res.value = full;
    res.tail_bound = std::abs(full - coarse);
  }
  res.converged = res.tail_bound <= trunc.tail_tol;
  return res;
}

/// Coherent state (r = 0, n_th = 0), sign projector.
inline SeriesResult qpd_series_coherent(const StateSpec& state, int s1, int s2, double t1, double t2,
                                        const TruncationConfig& trunc = {}, const UnitsConfig& units = {},
                                        const OffsetFunction& offset = {}) {
  if (state.r != 0.0 || state.n_th != 0.0)
    throw std::invalid_argument("qpd_series_coherent: requires r = 0 and n_th = 0");
  return qpd_series(state, MeasurementSpec::sign(offset), s1, s2, t1, t2, trunc, units);
}

/// Squeezed coherent state (n_th = 0), sign projector.
inline SeriesResult qpd_series_squeezed(const StateSpec& state, int s1, int s2, double t1, double t2,
                                        const TruncationConfig& trunc = {}, const UnitsConfig& units = {},
                                        const OffsetFunction& offset = {}) {
  if (state.n_th != 0.0) throw std::invalid_argument("qpd_series_squeezed: requires n_th = 0");
  return qpd_series(state, MeasurementSpec::sign(offset), s1, s2, t1, t2, trunc, units);
}

/// Thermal squeezed coherent state, sign projector.
inline SeriesResult qpd_series_thermal(const StateSpec& state, int s1, int s2, double t1, double t2,
                                       const TruncationConfig& trunc = {}, const UnitsConfig& units = {},
                                       const OffsetFunction& offset = {}) {
  return qpd_series(state, MeasurementSpec::sign(offset), s1, s2, t1, t2, trunc, units);
}

/// Squeezed vacuum (xi = 0, n_th = 0), window projector of half-width L.
inline SeriesResult qpd_series_window(const StateSpec& state, double L, int s1, int s2, double t1, double t2,
                                      const TruncationConfig& trunc = {}, const UnitsConfig& units = {}) {
  if (state.xi != Complex(0.0, 0.0) || state.n_th != 0.0)
    throw std::invalid_argument("qpd_series_window: requires xi = 0 and n_th = 0");
  return qpd_series(state, MeasurementSpec::window(L), s1, s2, t1, t2, trunc, units);
}

}  // namespace lgq
