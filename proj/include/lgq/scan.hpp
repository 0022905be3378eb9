#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lgq/evaluate.hpp"

namespace lgq {

inline constexpr double kLudersFloor = -0.125;

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is claimed
/// from a shared counter; results must be written to slots owned by i, which
/// makes the outcome independent of scheduling. Exceptions are rethrown
/// after all workers finish (the lowest index wins).
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct T2Search {
  double t2_min = 0.0;
  double t2_max = 2.0 * std::numbers::pi;
  int coarse_steps = 200;
  int refine_iters = 40;

  void validate() const {
    if (!std::isfinite(t2_min) || !std::isfinite(t2_max) || !(t2_max > t2_min))
      throw std::invalid_argument("t2_search: requires t2_max > t2_min");
    if (coarse_steps < 2) throw std::invalid_argument("t2_search: coarse_steps must be >= 2");
    if (refine_iters < 0) throw std::invalid_argument("t2_search: refine_iters must be >= 0");
  }
};

struct T2Min {
  double q_min = std::numeric_limits<double>::quiet_NaN();
  double t2_argmin = std::numeric_limits<double>::quiet_NaN();
  int evaluations = 0;
  int failures = 0;
};

/// Coarse grid of coarse_steps + 1 points followed by golden-section search
/// in the bracket around the best grid point. Evaluator failures (exceptions
/// or NaN) are skipped; if every point fails the result is NaN.
inline T2Min minimize_over_t2(const std::function<double(double)>& eval, const T2Search& search) {
  search.validate();
  T2Min out;
  auto f = [&](double t) {
    ++out.evaluations;
    double v;
    try {
      v = eval(t);
    } catch (const std::exception&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isnan(v)) ++out.failures;
    return v;
  };
  auto consider = [&](double t, double v) {
    if (!std::isnan(v) && (std::isnan(out.q_min) || v < out.q_min)) {
      out.q_min = v;
      out.t2_argmin = t;
    }
  };
  const int n = search.coarse_steps;
  const double h = (search.t2_max - search.t2_min) / n;
  int best = -1;
  for (int i = 0; i <= n; ++i) {
    const double t = search.t2_min + i * h;
    const double v = f(t);
    if (!std::isnan(v) && (best < 0 || v < out.q_min)) best = i;
    consider(t, v);
  }
  if (best < 0 || search.refine_iters == 0) return out;

  double a = search.t2_min + std::max(best - 1, 0) * h;
  double b = search.t2_min + std::min(best + 1, n) * h;
  constexpr double invphi = 0.61803398874989484820;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (int it = 0; it < search.refine_iters; ++it) {
    // NaN compares false, which moves the bracket toward the other side.
    if (fc < fd || std::isnan(fd)) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return out;
}

struct Axis {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  double at(int i) const { return steps == 1 ? min : min + (max - min) * i / (steps - 1); }
  void validate(const std::string& name) const {
    if (!std::isfinite(min) || !std::isfinite(max)) throw std::invalid_argument(name + ": non-finite bounds");
    if (steps < 1) throw std::invalid_argument(name + ": steps must be >= 1");
    if (steps == 1 && min != max) throw std::invalid_argument(name + ": steps = 1 requires min = max");
    if (steps >= 2 && !(max > min)) throw std::invalid_argument(name + ": requires max > min");
  }
};

enum class Plane { X0P0, RL };

inline std::string to_string(Plane p) { return p == Plane::X0P0 ? "x0p0" : "rL"; }
inline Plane parse_plane(const std::string& s) {
  if (s == "x0p0") return Plane::X0P0;
  if (s == "rL") return Plane::RL;
  throw std::invalid_argument("unknown plane '" + s + "' (expected x0p0 or rL)");
}

/// Plane x0p0: axis1 = x0, axis2 = p0, sign projector with `offset`.
/// Plane rL: axis1 = r, axis2 = L, window projector on squeezed vacuum.
struct ScanConfig {
  Plane plane = Plane::X0P0;
  double r = 0.0;
  double theta0 = 0.0;
  double n_th = 0.0;
  int s1 = 1;
  int s2 = -1;
  double t1 = 0.0;
  double L = 1.0;
  OffsetFunction offset{};
  Axis axis1{};
  Axis axis2{};
  T2Search t2_search{};
  Route route = Route::Series;
  Numerics numerics{};
  UnitsConfig units{};

  void validate() const {
    axis1.validate("grid.axis1");
    axis2.validate("grid.axis2");
    t2_search.validate();
    validate_outcomes(s1, s2);
    units.validate();
    if (r < 0.0 || n_th < 0.0) throw std::invalid_argument("r and n_th must be >= 0");
    if (plane == Plane::RL) {
      if (axis1.min < 0.0) throw std::invalid_argument("grid.axis1 (r) must be >= 0");
      if (!(axis2.min > 0.0)) throw std::invalid_argument("grid.axis2 (L) must be > 0");
    }
    check_route_applicable(route, state_at(0, 0), measurement_at(0));
  }

  StateSpec state_at(int i, int j) const {
    if (plane == Plane::X0P0) return StateSpec::from_phase_space(axis1.at(i), axis2.at(j), r, theta0, n_th);
    return StateSpec{Complex(0.0, 0.0), axis1.at(i), theta0, n_th};
  }
  MeasurementSpec measurement_at(int j) const {
    if (plane == Plane::X0P0) return MeasurementSpec::sign(offset);
    return MeasurementSpec::window(axis2.at(j));
  }
};

struct ScanCell {
  double axis1 = 0.0;
  double axis2 = 0.0;
  double q_min = std::numeric_limits<double>::quiet_NaN();
  double t2_argmin = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string error;
};

struct ScanResult {
  std::vector<ScanCell> cells;  // row-major: axis1 outer, axis2 inner
  int rows = 0;
  int cols = 0;
  double global_min = std::numeric_limits<double>::quiet_NaN();
  double global_axis1 = std::numeric_limits<double>::quiet_NaN();
  double global_axis2 = std::numeric_limits<double>::quiet_NaN();
  double global_t2 = std::numeric_limits<double>::quiet_NaN();
  int failed_cells = 0;
  int below_floor_cells = 0;
};

inline std::function<double(double)> t2_evaluator(const StateSpec& state, const MeasurementSpec& meas, int s1, int s2,
                                                  double t1, Route route, const Numerics& num,
                                                  const UnitsConfig& units) {
  return [=](double t2) { return evaluate_qpd(state, meas, QpdQuery{s1, s2, t1, t2, route}, num, units).value; };
}

inline ScanResult scan_plane(const ScanConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  ScanResult res;
  res.rows = cfg.axis1.steps;
  res.cols = cfg.axis2.steps;
  res.cells.resize(static_cast<std::size_t>(res.rows) * static_cast<std::size_t>(res.cols));
  parallel_for(res.cells.size(), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx / static_cast<std::size_t>(res.cols));
    const int j = static_cast<int>(idx % static_cast<std::size_t>(res.cols));
    ScanCell& cell = res.cells[idx];
    cell.axis1 = cfg.axis1.at(i);
    cell.axis2 = cfg.axis2.at(j);
    try {
      const auto m = minimize_over_t2(
          t2_evaluator(cfg.state_at(i, j), cfg.measurement_at(j), cfg.s1, cfg.s2, cfg.t1, cfg.route, cfg.numerics,
                       cfg.units),
          cfg.t2_search);
      cell.q_min = m.q_min;
      cell.t2_argmin = m.t2_argmin;
      cell.failed = std::isnan(m.q_min);
      if (cell.failed) cell.error = "all evaluations failed";
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });
  // Ordered single-threaded reduction.
  for (const auto& c : res.cells) {
    if (c.failed) {
      ++res.failed_cells;
      continue;
    }
    if (c.q_min < kLudersFloor - 1e-6) ++res.below_floor_cells;
    if (std::isnan(res.global_min) || c.q_min < res.global_min) {
      res.global_min = c.q_min;
      res.global_axis1 = c.axis1;
      res.global_axis2 = c.axis2;
      res.global_t2 = c.t2_argmin;
    }
  }
  return res;
}

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct GlobalOptions {
  int starts_per_axis = 5;  // grid points per free axis
  int local_starts = 4;     // best grid points refined by Nelder-Mead
  int max_iters = 400;
  double xtol = 1e-7;
  double ftol = 1e-12;
  unsigned threads = 1;
};

struct StartOutcome {
  std::vector<double> start;
  double start_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> argmin;
  double value = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

struct GlobalResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> argmin;
  std::vector<StartOutcome> starts;
  int evaluations = 0;
};

namespace detail {

inline double safe_eval(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x) {
  try {
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Nelder-Mead over the free coordinates, clamped to the box.
inline StartOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<Bounds>& box, const std::vector<int>& free,
                                const std::vector<double>& start, double start_value, const std::vector<double>& step,
                                const GlobalOptions& opt, int& evaluations) {
  const std::size_t d = free.size();
  auto clamp = [&](std::vector<double> x) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], box[k].lo, box[k].hi);
    return x;
  };
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    return safe_eval(f, x);
  };
  std::vector<std::vector<double>> simplex{start};
  std::vector<double> values{start_value};
  for (std::size_t k = 0; k < d; ++k) {
    auto x = start;
    const auto idx = static_cast<std::size_t>(free[k]);
    x[idx] += (x[idx] + step[k] <= box[idx].hi) ? step[k] : -step[k];
    x = clamp(x);
    simplex.push_back(x);
    values.push_back(eval(x));
  }
  StartOutcome out;
  out.start = start;
  out.start_value = start_value;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    std::vector<std::size_t> order(simplex.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (auto k : order) {
      s2.push_back(simplex[k]);
      v2.push_back(values[k]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
    double spread = 0.0;
    for (std::size_t k = 1; k < simplex.size(); ++k)
      for (auto c : free)
        spread = std::max(spread, std::abs(simplex[k][static_cast<std::size_t>(c)] - simplex[0][static_cast<std::size_t>(c)]));
    if (spread < opt.xtol && std::abs(values.back() - values.front()) < opt.ftol) break;

    std::vector<double> centroid = simplex[0];
    for (auto c : free) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += simplex[k][static_cast<std::size_t>(c)];
      centroid[static_cast<std::size_t>(c)] = acc / static_cast<double>(d);
    }
    auto along = [&](double coef) {
      auto x = centroid;
      for (auto c : free) {
        const auto ci = static_cast<std::size_t>(c);
        x[ci] = centroid[ci] + coef * (simplex.back()[ci] - centroid[ci]);
      }
      return clamp(x);
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < values[0]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex.back() = xe;
        values.back() = fe;
      } else {
        simplex.back() = xr;
        values.back() = fr;
      }
    } else if (fr < values[d - 1]) {
      simplex.back() = xr;
      values.back() = fr;
    } else {
      const bool outside = fr < values.back();
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, values.back())) {
        simplex.back() = xc;
        values.back() = fc;
      } else {
        for (std::size_t k = 1; k < simplex.size(); ++k) {
          for (auto c : free) {
            const auto ci = static_cast<std::size_t>(c);
            simplex[k][ci] = simplex[0][ci] + 0.5 * (simplex[k][ci] - simplex[0][ci]);
          }
          values[k] = eval(simplex[k]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] < values[best]) best = k;
  out.argmin = simplex[best];
  out.value = values[best];
  out.iterations = it;
  return out;
}

}  // namespace detail

/// Multi-start minimization in a box: a regular grid of starts, then
/// Nelder-Mead from the best `local_starts` of them. Every start is
/// reported. Axes with lo == hi are held fixed; a fully degenerate box
/// returns the single evaluation.
inline GlobalResult global_minimize(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<Bounds>& box, const GlobalOptions& opt = {}) {
  if (box.empty()) throw std::invalid_argument("global_minimize: empty box");
  std::vector<int> free;
  for (std::size_t k = 0; k < box.size(); ++k) {
    if (!std::isfinite(box[k].lo) || !std::isfinite(box[k].hi) || box[k].hi < box[k].lo)
      throw std::invalid_argument("global_minimize: invalid bounds");
    if (box[k].hi > box[k].lo) free.push_back(static_cast<int>(k));
  }
  if (opt.starts_per_axis < 1 || opt.local_starts < 1) throw std::invalid_argument("global_minimize: bad options");
  GlobalResult res;

  std::vector<double> base(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) base[k] = box[k].lo;
  if (free.empty()) {
    res.value = f(base);
    res.argmin = base;
    res.evaluations = 1;
    res.starts.push_back({base, res.value, base, res.value, 0});
    return res;
  }

  const int per = opt.starts_per_axis;
  std::size_t total = 1;
  for (std::size_t k = 0; k < free.size(); ++k) total *= static_cast<std::size_t>(per);
  std::vector<std::vector<double>> grid(total, base);
  std::vector<double> step(free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    const auto& b = box[static_cast<std::size_t>(free[k])];
    step[k] = 0.5 * (b.hi - b.lo) / std::max(1, per - 1);
    if (per == 1) step[k] = 0.25 * (b.hi - b.lo);
  }
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t rem = g;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const int idx = static_cast<int>(rem % static_cast<std::size_t>(per));
      rem /= static_cast<std::size_t>(per);
      const auto& b = box[static_cast<std::size_t>(free[k])];
      grid[g][static_cast<std::size_t>(free[k])] = per == 1 ? 0.5 * (b.lo + b.hi) : b.lo + (b.hi - b.lo) * idx / (per - 1);
    }
  }
  std::vector<double> gv(total);
  parallel_for(total, opt.threads, [&](std::size_t g) { gv[g] = detail::safe_eval(f, grid[g]); });
  res.evaluations += static_cast<int>(total);

  std::vector<std::size_t> order(total);
  for (std::size_t g = 0; g < total; ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gv[a] < gv[b]; });
  const std::size_t nloc = std::min<std::size_t>(static_cast<std::size_t>(opt.local_starts), total);
  std::vector<StartOutcome> local(nloc);
  std::vector<int> evals(nloc, 0);
  parallel_for(nloc, opt.threads, [&](std::size_t s) {
    local[s] = detail::nelder_mead(f, box, free, grid[order[s]], gv[order[s]], step, opt, evals[s]);
  });
  for (std::size_t s = 0; s < nloc; ++s) {
    res.evaluations += evals[s];
    res.starts.push_back(local[s]);
    if (std::isnan(res.value) || local[s].value < res.value) {
      res.value = local[s].value;
      res.argmin = local[s].argmin;
    }
  }
  return res;
}

}  // namespace lgq
