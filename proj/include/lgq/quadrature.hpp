#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <limits>
#include <vector>

namespace lgq {

/// Nodes and weights of a quadrature rule on a finite interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  auto apply(F&& f) const -> decltype(f(0.0)) {
    decltype(f(0.0)) sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

namespace detail {

// Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void legendre_reference(int order, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(order), 0.0);
  w.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
    }
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(order - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(order - 1 - i)] = wi;
  }
}

}  // namespace detail

/// Gauss-Legendre rule of the given order mapped onto [a, b]. Exact for
/// polynomials of degree <= 2*order - 1.
inline QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("gauss_legendre: non-finite endpoint");
  if (!(a < b)) throw std::invalid_argument("gauss_legendre: requires a < b");
  QuadratureRule rule;
  detail::legendre_reference(order, rule.nodes, rule.weights);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  rule.a = a;
  rule.b = b;
  return rule;
}

/// Composite rule: [a, b] split into equal panels, each with a Gauss-Legendre
/// rule of `order` points.
inline QuadratureRule composite_gauss_legendre(int order, double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels must be >= 1");
  const QuadratureRule ref = gauss_legendre(order, -1.0, 1.0);
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.reserve(static_cast<std::size_t>(order) * static_cast<std::size_t>(panels));
  rule.weights.reserve(rule.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      rule.nodes.push_back(mid + 0.5 * h * ref.nodes[i]);
      rule.weights.push_back(0.5 * h * ref.weights[i]);
    }
  }
  return rule;
}

/// Outcome of an adaptive integration.
template <class T>
struct AdaptiveResult {
  T value{};
  double error_estimate = 0.0;
  int panels = 0;
  bool converged = true;
};

/// Globally refined Gauss-Legendre integration: every panel whose
/// (whole - halves) discrepancy exceeds its share of `tol` is bisected, up to
/// `max_depth` levels. A panel also stops once the discrepancy is at the
/// rounding level of its absolute mass, since refining further cannot help.
/// Works for real or complex integrands.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double tol, int order = 16, int max_depth = 30)
    -> AdaptiveResult<decltype(f(0.0))> {
  using T = decltype(f(0.0));
  constexpr double kRoundingFloor = 64.0 * std::numeric_limits<double>::epsilon();
  constexpr int kMaxPanels = 1 << 20;
  const QuadratureRule ref = gauss_legendre(order, -1.0, 1.0);
  struct Panel {
    T value;
    double mass;
  };
  auto panel = [&](double lo, double hi) {
    const double h = 0.5 * (hi - lo);
    const double m = 0.5 * (hi + lo);
    T s{};
    double mass = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const T v = f(m + h * ref.nodes[i]);
      s += ref.weights[i] * v;
      mass += ref.weights[i] * std::abs(v);
    }
    return Panel{T(s * h), mass * std::abs(h)};
  };

  struct Frame {
    double lo, hi;
    T whole;
    int depth;
  };
  AdaptiveResult<T> out;
  std::vector<Frame> stack;
  stack.push_back({a, b, panel(a, b).value, 0});
  const double width = b - a;
  int visited = 0;
  while (!stack.empty()) {
    const Frame fr = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (fr.lo + fr.hi);
    const Panel left = panel(fr.lo, mid);
    const Panel right = panel(mid, fr.hi);
    const T halves = left.value + right.value;
    const double err = std::abs(halves - fr.whole);
    const double budget = tol * (fr.hi - fr.lo) / width;
    const bool at_rounding = err <= kRoundingFloor * (left.mass + right.mass);
    ++visited;
    if (err <= budget || at_rounding || fr.depth >= max_depth || visited >= kMaxPanels) {
      if (err > budget && !at_rounding) out.converged = false;
      out.value += halves;
      out.error_estimate += err;
      ++out.panels;
    } else {
      stack.push_back({mid, fr.hi, right.value, fr.depth + 1});
      stack.push_back({fr.lo, mid, left.value, fr.depth + 1});
    }
  }
  return out;
}

}  // namespace lgq
