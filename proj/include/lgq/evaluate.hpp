#pragma once

#include <stdexcept>
#include <string>

#include "lgq/fock_oracle.hpp"
#include "lgq/measurement.hpp"
#include "lgq/qpd_integral.hpp"
#include "lgq/qpd_series.hpp"
#include "lgq/states.hpp"

namespace lgq {

enum class Route { Integral, Series, Oracle };

inline std::string to_string(Route r) {
  switch (r) {
    case Route::Integral: return "integral";
    case Route::Series: return "series";
    case Route::Oracle: return "oracle";
  }
  return "?";
}

inline Route parse_route(const std::string& s) {
  if (s == "integral") return Route::Integral;
  if (s == "series") return Route::Series;
  if (s == "oracle") return Route::Oracle;
  throw std::invalid_argument("unknown route '" + s + "' (expected integral, series or oracle)");
}

/// Numerical controls for all three routes.
struct Numerics {
  TruncationConfig trunc = TruncationConfig::accurate();
  IntegralOptions integral{16, 1e-11, 40, false};
  OracleConfig oracle{};
};

struct QpdQuery {
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;
  double t2 = 0.0;
  Route route = Route::Series;
};

struct QpdValue {
  double value = 0.0;
  double diagnostic = 0.0;    // tail bound, quadrature error estimate or trace deficit
  std::string diagnostic_name;
  bool converged = true;
};

/// Throws std::invalid_argument when the route cannot handle the state or
/// measurement, so callers can map it to a usage error.
inline void check_route_applicable(Route route, const StateSpec& state, const MeasurementSpec& meas) {
  if (route == Route::Integral) {
    if (meas.is_window()) throw std::invalid_argument("route integral does not support the window projector");
    if (state.n_th != 0.0) throw std::invalid_argument("route integral does not support thermal states");
  }
  if (route == Route::Series && meas.is_window() && (state.xi != Complex(0.0, 0.0) || state.n_th != 0.0))
    throw std::invalid_argument("route series supports the window projector only for squeezed vacuum");
}

inline QpdValue evaluate_qpd(const StateSpec& state, const MeasurementSpec& meas, const QpdQuery& q,
                             const Numerics& num = {}, const UnitsConfig& units = {}) {
  check_route_applicable(q.route, state, meas);
  QpdValue out;
  switch (q.route) {
    case Route::Integral: {
      const auto r = qpd_integral(state, meas.offset, q.s1, q.s2, q.t1, q.t2, num.integral, units);
      out.value = r.value;
      out.diagnostic = r.coincident ? 0.0 : std::max(r.error_estimate, r.self_check_delta);
      out.diagnostic_name = "quadrature_error";
      out.converged = r.converged;
      break;
    }
    case Route::Series: {
      const auto r = qpd_series(state, meas, q.s1, q.s2, q.t1, q.t2, num.trunc, units);
      out.value = r.value;
      out.diagnostic = r.tail_bound;
      out.diagnostic_name = "tail_bound";
      out.converged = r.converged;
      break;
    }
    case Route::Oracle: {
      const auto r = qpd_oracle_all(state, meas, q.t1, q.t2, num.oracle, units);
      out.value = r.at(q.s1, q.s2);
      out.diagnostic = 1.0 - r.trace;
      out.diagnostic_name = "trace_deficit";
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace lgq
