#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lgq/evaluate.hpp"
#include "lgq/io.hpp"
#include "lgq/scan.hpp"

namespace lgq::verify {

struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string relation;  // how measured is compared with expected
};

struct CaseReport {
  std::string id;
  std::vector<Check> checks;
  double seconds = 0.0;
  std::map<std::string, double> values;  // named results reused by other cases

  bool pass() const {
    if (checks.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void close(const std::string& name, double measured, double expected, double tol) {
    checks.push_back({name, measured, expected, tol, std::abs(measured - expected) <= tol, "|m-e|<=tol"});
  }
  void at_most(const std::string& name, double measured, double bound) {
    checks.push_back({name, measured, bound, 0.0, measured <= bound, "m<=e"});
  }
  void at_least(const std::string& name, double measured, double bound) {
    checks.push_back({name, measured, bound, 0.0, measured >= bound, "m>=e"});
  }
  void within(const std::string& name, double measured, double lo, double hi) {
    checks.push_back({name, measured, 0.5 * (lo + hi), 0.5 * (hi - lo), measured >= lo && measured <= hi, "lo<=m<=hi"});
  }
  void truth(const std::string& name, bool ok, double measured = 0.0) {
    checks.push_back({name, measured, 0.0, 0.0, ok, "flag"});
  }
};

namespace detail {

// Deterministic uniform in [0, 1) independent of the library's distributions.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double operator()(double lo, double hi) { return lo + (hi - lo) * (*this)(); }
  int sign() { return (*this)() < 0.5 ? 1 : -1; }

 private:
  std::mt19937_64 rng_;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

struct BatteryPoint {
  StateSpec state;
  MeasurementSpec meas;
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Random parameter battery: |xi| <= 2, r <= 1, theta0 in [0, 2 pi),
/// n_th in {0, 0.5, 1}; every fifth point uses the window projector on
/// squeezed vacuum, where that family is defined.
inline std::vector<BatteryPoint> battery(int count = 200, std::uint64_t seed = 20240611) {
  detail::Uniform u(seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<BatteryPoint> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    BatteryPoint p;
    const double rad = u(0.0, 2.0), ang = u(0.0, two_pi);
    p.state.xi = std::polar(rad, ang);
    p.state.r = u(0.0, 1.0);
    p.state.theta0 = u(0.0, two_pi);
    p.s1 = u.sign();
    p.s2 = u.sign();
    p.t1 = u(0.0, two_pi);
    p.t2 = u(0.0, two_pi);
    const double L = u(0.2, 2.0);
    switch (i % 5) {
      case 2: p.state.n_th = 0.5; break;
      case 3: p.state.n_th = 1.0; break;
      case 4:
        p.state.xi = Complex(0.0, 0.0);
        p.meas = MeasurementSpec::window(L);
        break;
      default: break;
    }
    pts.push_back(p);
  }
  return pts;
}

inline Numerics default_numerics(int oracle_dim = 400) {
  Numerics n;
  n.oracle.dim = oracle_dim;
  return n;
}

inline std::vector<Route> applicable_routes(const StateSpec& s, const MeasurementSpec& m) {
  std::vector<Route> out;
  for (Route r : {Route::Integral, Route::Series, Route::Oracle}) {
    try {
      check_route_applicable(r, s, m);
      out.push_back(r);
    } catch (const std::invalid_argument&) {
    }
  }
  return out;
}

/// q[a][b] for s1 = (a ? -1 : 1), s2 = (b ? -1 : 1); one oracle solve covers
/// all four outcomes.
inline std::array<std::array<double, 2>, 2> all_outcomes(const BatteryPoint& p, double t1, double t2, Route route,
                                                         const Numerics& num) {
  std::array<std::array<double, 2>, 2> q{};
  if (route == Route::Oracle) {
    const auto o = qpd_oracle_all(p.state, p.meas, t1, t2, num.oracle);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) q[a][b] = o.at(a ? -1 : 1, b ? -1 : 1);
    return q;
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) q[a][b] = evaluate_qpd(p.state, p.meas, {a ? -1 : 1, b ? -1 : 1, t1, t2, route}, num).value;
  return q;
}

// Reference point of the three-route comparison.
inline StateSpec fig1_state() { return StateSpec::from_phase_space(0.550, 1.925, 1.0, std::numbers::pi / 3.0); }

/// Series at n_max = 5, 50, 500 against the integral route on a 0.05 grid.
inline CaseReport fig1() {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "fig1";
  const auto st = fig1_state();
  IntegralOptions iopt;
  double max500 = 0.0, max50_500 = 0.0, max5_50 = 0.0;
  TruncationConfig t5, t50, t500;
  t5.n_max = 5;
  t50.n_max = 50;
  t500.n_max = 500;
  const int n = static_cast<int>(std::floor(2.0 * std::numbers::pi / 0.05));
  for (int k = 0; k <= n; ++k) {
    const double t2 = 0.05 * k;
    const double qi = qpd_integral(st, {}, 1, -1, 0.0, t2, iopt).value;
    const double q5 = qpd_series_squeezed(st, 1, -1, 0.0, t2, t5).value;
    const double q50 = qpd_series_squeezed(st, 1, -1, 0.0, t2, t50).value;
    const double q500 = qpd_series_squeezed(st, 1, -1, 0.0, t2, t500).value;
    max500 = std::max(max500, std::abs(q500 - qi));
    max50_500 = std::max(max50_500, std::abs(q500 - q50));
    max5_50 = std::max(max5_50, std::abs(q50 - q5));
  }
  rep.at_most("max |series(500) - integral|", max500, 1e-3);
  rep.at_most("max |series(500) - series(50)| below max |series(50) - series(5)|", max50_500, max5_50);
  rep.seconds = sw.seconds();
  rep.at_most("runtime seconds", rep.seconds, 60.0);
  return rep;
}

/// Every applicable pair of routes agrees on the random battery.
inline CaseReport oracle_battery(int count = 200, int oracle_dim = 400, double tol = 1e-5) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "battery";
  const auto num = default_numerics(oracle_dim);
  double worst = 0.0;
  int failures = 0, pairs = 0;
  for (const auto& p : battery(count)) {
    std::vector<double> vals;
    for (Route r : applicable_routes(p.state, p.meas)) {
      try {
        vals.push_back(evaluate_qpd(p.state, p.meas, {p.s1, p.s2, p.t1, p.t2, r}, num).value);
      } catch (const std::exception&) {
        ++failures;
      }
    }
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = a + 1; b < vals.size(); ++b) {
        worst = std::max(worst, std::abs(vals[a] - vals[b]));
        ++pairs;
      }
  }
  rep.at_most("max pairwise route difference over " + std::to_string(pairs) + " pairs", worst, tol);
  rep.at_most("route evaluation failures", failures, 0.0);
  rep.seconds = sw.seconds();
  rep.at_most("runtime seconds", rep.seconds, 600.0);
  return rep;
}

struct TableRow {
  int s1, s2;
  double r, x0, p0;
};

inline const std::vector<TableRow>& table1_rows() {
  static const std::vector<TableRow> rows = {
      {1, -1, 0.0, -0.554, 1.95},  {-1, 1, 0.0, 0.550, 1.93},  {1, -1, 0.5, -0.896, 1.18},
      {-1, 1, 0.5, 0.904, 1.17},   {1, -1, 0.6, -0.991, 1.07}, {-1, 1, 0.6, 1.00, 1.06},
      {1, -1, 0.7, -1.09, 0.968},  {-1, 1, 0.7, 1.09, 0.968},  {1, -1, 0.8, -1.21, 0.875},
      {-1, 1, 0.8, 1.22, 0.866},   {1, -1, 0.9, -1.34, 0.792}, {-1, 1, 0.9, 1.34, 0.792},
      {1, -1, 1.0, -1.48, 0.717},  {-1, 1, 1.0, 1.48, 0.717}};
  return rows;
}

inline CaseReport table1() {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "table1";
  const Numerics num;
  int ok = 0;
  for (const auto& row : table1_rows()) {
    const auto st = StateSpec::from_phase_space(row.x0, row.p0, row.r, 0.0);
    const auto m = minimize_over_t2(t2_evaluator(st, MeasurementSpec::sign(), row.s1, row.s2, 0.0, Route::Series, num, {}),
                                    T2Search{});
    const double v = 4.0 * m.q_min;
    const std::string name = "4 q_min (s1=" + std::to_string(row.s1) + ", s2=" + std::to_string(row.s2) +
                             ", r=" + format_double(row.r, 3) + ")";
    rep.close(name, v, -0.113, 0.003);
    if (std::abs(v + 0.113) <= 0.003) ++ok;
  }
  rep.close("rows within tolerance", ok, 14, 0.0);
  rep.seconds = sw.seconds();
  rep.at_most("runtime seconds", rep.seconds, 120.0);
  return rep;
}

/// Settings shared by the x0-p0 plane minimizations.
inline GlobalOptions plane_global_options() {
  GlobalOptions g;
  g.starts_per_axis = 5;
  g.local_starts = 4;
  return g;
}
inline T2Search plane_t2_search() {
  T2Search t;
  t.coarse_steps = 100;
  t.refine_iters = 40;
  return t;
}

/// Global minimum of q_{s1,s2}(0, t2) over (x0, p0) in [-3, 3]^2 and t2.
inline GlobalResult plane_minimum(int s1, int s2, double r, double n_th) {
  const Numerics num;
  const auto ts = plane_t2_search();
  auto f = [&](const std::vector<double>& x) {
    const auto st = StateSpec::from_phase_space(x[0], x[1], r, 0.0, n_th);
    return minimize_over_t2(t2_evaluator(st, MeasurementSpec::sign(), s1, s2, 0.0, Route::Series, num, {}), ts).q_min;
  };
  return global_minimize(f, {{-3.0, 3.0}, {-3.0, 3.0}}, plane_global_options());
}

inline CaseReport fig2min() {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "fig2min";
  const std::pair<int, int> panels[] = {{1, -1}, {-1, 1}, {1, 1}, {-1, -1}};
  const char* labels[] = {"a", "b", "c", "d"};
  for (int k = 0; k < 4; ++k) {
    const auto g = plane_minimum(panels[k].first, panels[k].second, 0.5, 0.0);
    rep.values[std::string("panel_") + labels[k]] = g.value;
    rep.close(std::string("panel (") + labels[k] + ") s1=" + std::to_string(panels[k].first) +
                  " s2=" + std::to_string(panels[k].second) + " global min q",
              g.value, -0.113 / 4.0, 0.001);
  }
  rep.seconds = sw.seconds();
  return rep;
}

inline CaseReport window_min() {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "window-min";
  const Numerics num;
  // The window quasi-probability has period pi/omega in t2, so [0, pi]
  // covers every distinct value.
  T2Search ts;
  ts.t2_max = std::numbers::pi;
  double best_t2 = 0.0;
  auto f = [&](const std::vector<double>& x) {
    const StateSpec st{Complex(0.0, 0.0), x[0], 0.0, 0.0};
    return minimize_over_t2(t2_evaluator(st, MeasurementSpec::window(x[1]), 1, 1, 0.0, Route::Series, num, {}), ts)
        .q_min;
  };
  const auto g = global_minimize(f, {{0.0, 0.0}, {0.5, 2.0}}, plane_global_options());
  {
    const StateSpec st{Complex(0.0, 0.0), 0.0, 0.0, 0.0};
    best_t2 = minimize_over_t2(t2_evaluator(st, MeasurementSpec::window(g.argmin[1]), 1, 1, 0.0, Route::Series, num, {}),
                               ts)
                  .t2_argmin;
  }
  rep.close("global min q", g.value, -0.0538, 0.001);
  rep.within("argmin L", g.argmin[1], 1.00, 1.05);
  rep.within("argmin omega t2", best_t2, 1.50, 1.60);
  rep.values["q"] = g.value;
  rep.values["L"] = g.argmin[1];
  rep.values["t2"] = best_t2;
  rep.seconds = sw.seconds();
  return rep;
}

/// Thermal minima of q_{-1,1} are nondecreasing in temperature. When
/// `panel_b` is NaN the zero-temperature panel value is computed here.
inline CaseReport thermal_order(double panel_b = std::numeric_limits<double>::quiet_NaN()) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "thermal-order";
  const double temps[] = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> mins;
  for (double T : temps) {
    const double v = plane_minimum(-1, 1, 0.5, n_th_from_temperature(T)).value;
    mins.push_back(v);
    rep.values["T=" + format_double(T, 3)] = v;
  }
  for (std::size_t k = 1; k < mins.size(); ++k)
    rep.at_least("min at T=" + format_double(temps[k], 3) + " >= min at T=" + format_double(temps[k - 1], 3), mins[k],
                 mins[k - 1]);
  if (std::isnan(panel_b)) panel_b = mins[0];
  rep.close("T=0 minimum vs panel (b) minimum", mins[0], panel_b, 0.001);
  rep.seconds = sw.seconds();
  return rep;
}

/// Sum over outcomes is 1; marginals equal the erf closed form.
inline CaseReport normalization(int count = 60, int oracle_dim = 300) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "normalization";
  const auto num = default_numerics(oracle_dim);
  double worst_sum = 0.0, worst_marg = 0.0;
  for (const auto& p : battery(count, 777)) {
    for (Route r : applicable_routes(p.state, p.meas)) {
      const auto q = all_outcomes(p, p.t1, p.t2, r, num);
      worst_sum = std::max(worst_sum, std::abs(q[0][0] + q[0][1] + q[1][0] + q[1][1] - 1.0));
      if (p.state.n_th != 0.0 || p.meas.is_window()) continue;
      // Gaussian position marginal: P(X > cut) = erfc((cut - x_xi)/lambda)/2.
      auto plus_prob = [&](double t) {
        const double cut = p.meas.offset.position_at(t);
        return 0.5 * std::erfc((cut - x_xi_of(t, p.state.xi)) / lambda_of(t, p.state.r, p.state.theta0));
      };
      const double p1 = plus_prob(p.t1), p2 = plus_prob(p.t2);
      worst_marg = std::max({worst_marg, std::abs(q[0][0] + q[0][1] - p1), std::abs(q[1][0] + q[1][1] - (1.0 - p1)),
                             std::abs(q[0][0] + q[1][0] - p2), std::abs(q[0][1] + q[1][1] - (1.0 - p2))});
    }
  }
  rep.at_most("max |sum_{s1,s2} q - 1|", worst_sum, 1e-8);
  rep.at_most("max |marginal - erf closed form|", worst_marg, 5e-8);
  rep.seconds = sw.seconds();
  return rep;
}

/// q_{s,-s}(t, t) = 0 on every route.
inline CaseReport same_time(int count = 40) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "same-time";
  const auto num = default_numerics(300);
  double worst = 0.0;
  for (const auto& p : battery(count, 4242))
    for (Route r : applicable_routes(p.state, p.meas)) {
      const auto q = all_outcomes(p, p.t1, p.t1, r, num);
      worst = std::max({worst, std::abs(q[0][1]), std::abs(q[1][0])});
    }
  rep.at_most("max |q_{s,-s}(t, t)|", worst, 1e-12);
  rep.seconds = sw.seconds();
  return rep;
}

/// Squeezed coherent state equals the coherent state with amplitude gamma
/// at the reparameterized times.
inline CaseReport reduction(int count = 40) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "reduction";
  const Numerics num;
  double worst_series = 0.0, worst_integral = 0.0;
  for (const auto& p : battery(count, 99)) {
    StateSpec sq = p.state;
    sq.n_th = 0.0;
    const auto red = reduce_squeezed_to_coherent(sq);
    const StateSpec coh{red.xi_prime, 0.0, 0.0, 0.0};
    const double u1 = red.time_map(p.t1), u2 = red.time_map(p.t2);
    for (Route r : {Route::Series, Route::Integral}) {
      const double a = evaluate_qpd(sq, MeasurementSpec::sign(), {p.s1, p.s2, p.t1, p.t2, r}, num).value;
      const double b = evaluate_qpd(coh, MeasurementSpec::sign(), {p.s1, p.s2, u1, u2, r}, num).value;
      (r == Route::Series ? worst_series : worst_integral) =
          std::max(r == Route::Series ? worst_series : worst_integral, std::abs(a - b));
    }
  }
  rep.at_most("series: max |q_squeezed - q_coherent(reduced)|", worst_series, 1e-8);
  rep.at_most("integral: max |q_squeezed - q_coherent(reduced)|", worst_integral, 1e-8);
  rep.seconds = sw.seconds();
  return rep;
}

/// Ground state with xbar(t) = -2|xi| cos(wt - arg xi) reproduces |xi>.
inline CaseReport offset_equiv(int count = 40) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "offset-equiv";
  const Numerics num;
  double worst = 0.0;
  for (const auto& p : battery(count, 5150)) {
    const StateSpec coh{p.state.xi, 0.0, 0.0, 0.0};
    const StateSpec ground{};
    const auto off = MeasurementSpec::sign(OffsetFunction::mimicking_coherent(p.state.xi));
    for (Route r : {Route::Series, Route::Integral}) {
      const double a = evaluate_qpd(coh, MeasurementSpec::sign(), {p.s1, p.s2, p.t1, p.t2, r}, num).value;
      const double b = evaluate_qpd(ground, off, {p.s1, p.s2, p.t1, p.t2, r}, num).value;
      worst = std::max(worst, std::abs(a - b));
    }
  }
  rep.at_most("max |q_coherent - q_ground_with_offset|", worst, 1e-8);
  rep.seconds = sw.seconds();
  return rep;
}

/// Window quasi-probabilities are pi/omega periodic in t2.
inline CaseReport window_period(int count = 40) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "window-period";
  const Numerics num;
  detail::Uniform u(31337);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const StateSpec st{Complex(0.0, 0.0), u(0.0, 1.0), u(0.0, 2.0 * std::numbers::pi), 0.0};
    const double L = u(0.2, 2.0), t1 = u(0.0, 3.0), t2 = u(0.0, 3.0);
    const int s1 = u.sign(), s2 = u.sign();
    const double a = qpd_series_window(st, L, s1, s2, t1, t2, num.trunc).value;
    const double b = qpd_series_window(st, L, s1, s2, t1, t2 + std::numbers::pi, num.trunc).value;
    worst = std::max(worst, std::abs(a - b));
  }
  rep.at_most("max |q(t2) - q(t2 + pi)|", worst, 1e-8);
  rep.seconds = sw.seconds();
  return rep;
}

/// No quasi-probability falls below -1/8 on the battery or on a coarse grid
/// of every family.
inline CaseReport luders(int count = 200) {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "luders";
  const Numerics num;
  double lowest = 1.0;
  for (const auto& p : battery(count, 8080))
    lowest = std::min(lowest, evaluate_qpd(p.state, p.meas, {p.s1, p.s2, p.t1, p.t2, Route::Series}, num).value);
  for (int s1 : {1, -1})
    for (int s2 : {1, -1}) {
      ScanConfig cfg;
      cfg.r = 0.5;
      cfg.s1 = s1;
      cfg.s2 = s2;
      cfg.axis1 = {-2.0, 2.0, 5};
      cfg.axis2 = {-2.0, 2.0, 5};
      cfg.t2_search.coarse_steps = 60;
      const auto res = scan_plane(cfg);
      lowest = std::min(lowest, res.global_min);
      ScanConfig w = cfg;
      w.plane = Plane::RL;
      w.axis1 = {0.0, 1.0, 3};
      w.axis2 = {0.5, 2.0, 4};
      lowest = std::min(lowest, scan_plane(w).global_min);
    }
  rep.at_least("lowest q found", lowest, kLudersFloor - 1e-6);
  rep.seconds = sw.seconds();
  return rep;
}

/// Config used by the determinism check: thermal so that workers share the
/// matrix-element cache.
inline ScanConfig determinism_config() {
  ScanConfig cfg;
  cfg.r = 0.5;
  cfg.n_th = 0.3;
  cfg.s1 = -1;
  cfg.s2 = 1;
  cfg.axis1 = {0.0, 1.5, 4};
  cfg.axis2 = {0.5, 2.0, 4};
  cfg.t2_search.coarse_steps = 40;
  cfg.t2_search.refine_iters = 20;
  return cfg;
}

inline CaseReport determinism() {
  detail::Stopwatch sw;
  CaseReport rep;
  rep.id = "determinism";
  const auto cfg = determinism_config();
  const std::string base = scan_csv(scan_plane(cfg, 1));
  for (unsigned threads : {4u, 16u}) {
    jtable_cache().clear();
    const std::string other = scan_csv(scan_plane(cfg, threads));
    rep.truth("CSV with " + std::to_string(threads) + " workers identical to 1 worker", other == base);
  }
  rep.seconds = sw.seconds();
  return rep;
}

/// Cases runnable by name.
inline const std::vector<std::pair<std::string, std::function<CaseReport()>>>& cases() {
  static const std::vector<std::pair<std::string, std::function<CaseReport()>>> all = {
      {"fig1", [] { return fig1(); }},
      {"table1", [] { return table1(); }},
      {"fig2min", [] { return fig2min(); }},
      {"window-min", [] { return window_min(); }},
      {"thermal-order", [] { return thermal_order(); }},
      {"normalization", [] { return normalization(); }},
      {"reduction", [] { return reduction(); }},
      {"offset-equiv", [] { return offset_equiv(); }},
      {"luders", [] { return luders(); }},
      {"same-time", [] { return same_time(); }},
      {"window-period", [] { return window_period(); }},
      {"battery", [] { return oracle_battery(); }},
      {"determinism", [] { return determinism(); }},
  };
  return all;
}

}  // namespace lgq::verify
