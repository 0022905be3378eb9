#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "lgq/matrix_elements.hpp"
#include "lgq/states.hpp"

namespace lgq {

/// Dichotomic position measurement. Sign: Q = sgn(x - xbar(t)).
/// Window: Q = sgn(x - L) + sgn(-x - L) + 1, so Q = +1 outside [-L, L].
struct MeasurementSpec {
  enum class Kind { Sign, Window };
  Kind kind = Kind::Sign;
  OffsetFunction offset{};
  double L = 0.0;

  static MeasurementSpec sign(OffsetFunction offset = {}) { return {Kind::Sign, offset, 0.0}; }
  static MeasurementSpec window(double L) { return {Kind::Window, {}, L}; }

  bool is_window() const { return kind == Kind::Window; }

  void validate() const {
    if (kind == Kind::Window) {
      if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("MeasurementSpec: window half-width L must be > 0");
    } else {
      offset.validate();
    }
  }

  /// Region of dimensionless position selected by outcome s at time t.
  Region region(int s, double t, const UnitsConfig& units = {}) const {
    if (s != 1 && s != -1) throw std::invalid_argument("outcome s must be +1 or -1");
    if (kind == Kind::Window) return window_region(s, -L, L);
    return sign_region(s, offset.position_at(t, units));
  }

  std::string name() const { return kind == Kind::Window ? "window" : "sign"; }
};

inline void validate_outcomes(int s1, int s2) {
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) throw std::invalid_argument("outcomes s1, s2 must be +1 or -1");
}

}  // namespace lgq
