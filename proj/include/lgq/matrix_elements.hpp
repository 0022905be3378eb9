#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lgq/quadrature.hpp"
#include "lgq/special_functions.hpp"

namespace lgq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Beyond this distance every psi_n with n <= 512 has decayed below 1e-300.
inline constexpr double kDiagSpan = 40.0;

namespace detail {

// J_mn(x, inf) for m != n from psi/psi' values at x. Energy differences are
// (n - m) in units of hbar*omega; the oscillator scale cancels.
inline double wronskian_half_line(int m, int n, double psi_m, double dpsi_m, double psi_n, double dpsi_n) {
  return (psi_m * dpsi_n - psi_n * dpsi_m) / (2.0 * (n - m));
}

inline const QuadratureRule& diag_reference_rule() {
  static const QuadratureRule rule = composite_gauss_legendre(16, 0.0, kDiagSpan, 160);
  return rule;
}

}  // namespace detail

/// J_mn(x1, x2) = integral of psi_m psi_n over (x1, x2), m != n, in closed
/// form from the Wronskian. Either limit may be infinite.
inline double j_offdiag(int m, int n, double x1, double x2, int index_cap = kHermiteIndexCap) {
  if (m == n) throw std::domain_error("j_offdiag: m == n, use j_diag");
  if (m < 0 || n < 0) throw std::invalid_argument("j_offdiag: negative index");
  if (std::max(m, n) > index_cap) throw CapabilityError("j_offdiag: index above cap");
  if (std::isnan(x1) || std::isnan(x2)) throw std::domain_error("j_offdiag: NaN limit");
  if (!(x1 < x2)) throw std::invalid_argument("j_offdiag: requires x1 < x2");
  auto half_line = [&](double x) {
    if (!std::isfinite(x)) return 0.0;  // J_mn(+-inf, inf) = 0 off the diagonal
    const int top = std::max(m, n);
    const auto psi = hermite_psi_table(top, x);
    std::vector<double> dpsi(psi.size());
    hermite_psi_prime_table(psi, x, dpsi);
    return detail::wronskian_half_line(m, n, psi[static_cast<std::size_t>(m)], dpsi[static_cast<std::size_t>(m)],
                                       psi[static_cast<std::size_t>(n)], dpsi[static_cast<std::size_t>(n)]);
  };
  return half_line(x1) - half_line(x2);
}

/// J_nn(x, inf) for all n <= n_max at once. x >= 0 is integrated over
/// [x, x + 40] with composite Gauss-Legendre; x < 0 uses parity,
/// J_nn(x, inf) = 1 - J_nn(-x, inf). n = 0 uses erfc(x)/2 directly.
inline std::vector<double> j_diag_all(int n_max, double x) {
  if (n_max < 0) throw std::invalid_argument("j_diag_all: negative index");
  if (n_max > kHermiteTableCap) throw CapabilityError("j_diag_all: index above cap");
  if (std::isnan(x)) throw std::domain_error("j_diag_all: NaN cut");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (x == kInf) return out;
  if (x == -kInf) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const double a = std::abs(x);
  const QuadratureRule& ref = detail::diag_reference_rule();
  std::vector<double> psi(out.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double node = a + ref.nodes[i];
    hermite_psi_table(n_max, node, psi);
    for (std::size_t k = 0; k < psi.size(); ++k) out[k] += ref.weights[i] * psi[k] * psi[k];
  }
  out[0] = 0.5 * std::erfc(a);
  if (x < 0.0)
    for (auto& v : out) v = 1.0 - v;
  return out;
}

/// J_nn(x, inf).
inline double j_diag(int n, double x, int index_cap = kHermiteIndexCap) {
  if (n < 0) throw std::invalid_argument("j_diag: negative index");
  if (n > index_cap) throw CapabilityError("j_diag: index above cap");
  if (n == 0) {
    if (std::isnan(x)) throw std::domain_error("j_diag: NaN cut");
    return 0.5 * std::erfc(x);
  }
  return j_diag_all(n, x)[static_cast<std::size_t>(n)];
}

/// J_0n(x, inf) for n = 0..n_max; entry 0 is J_00 = erfc(x)/2.
inline std::vector<double> j0n_row(int n_max, double x) {
  if (n_max < 0) throw std::invalid_argument("j0n_row: negative index");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (std::isnan(x)) throw std::domain_error("j0n_row: NaN cut");
  if (x == kInf) return out;
  if (x == -kInf) {
    out[0] = 1.0;
    return out;
  }
  const auto psi = hermite_psi_table(n_max, x);
  std::vector<double> dpsi(psi.size());
  hermite_psi_prime_table(psi, x, dpsi);
  out[0] = 0.5 * std::erfc(x);
  for (int n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    out[k] = detail::wronskian_half_line(0, n, psi[0], dpsi[0], psi[k], dpsi[k]);
  }
  return out;
}

/// Dense rectangular table of J_mn(lower_cut, inf), 0 <= m < rows,
/// 0 <= n < cols, stored row-major. Square tables are symmetric.
struct JTable {
  double lower_cut = 0.0;
  int rows = 0;
  int cols = 0;
  std::vector<double> entries;

  int max_index() const { return std::min(rows, cols) - 1; }
  double at(int m, int n) const {
    if (m < 0 || n < 0 || m >= rows || n >= cols) throw std::out_of_range("JTable::at");
    return entries[static_cast<std::size_t>(m) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(n)];
  }
  double operator()(int m, int n) const {
    return entries[static_cast<std::size_t>(m) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(n)];
  }
};

/// Builds J_mn(lower_cut, inf) for m <= max_row, n <= max_col. Off-diagonal
/// entries use the Wronskian form, diagonal ones quadrature.
inline JTable build_jtable_rect(double lower_cut, int max_row, int max_col, int cap = kHermiteTableCap) {
  if (max_row < 0 || max_col < 0) throw std::invalid_argument("build_jtable: negative index");
  if (std::max(max_row, max_col) > cap)
    throw CapabilityError("build_jtable: max index " + std::to_string(std::max(max_row, max_col)) +
                          " exceeds cap " + std::to_string(cap));
  if (std::isnan(lower_cut)) throw std::domain_error("build_jtable: NaN cut");
  JTable t;
  t.lower_cut = lower_cut;
  t.rows = max_row + 1;
  t.cols = max_col + 1;
  t.entries.assign(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols), 0.0);
  const int top = std::max(max_row, max_col);
  if (lower_cut == kInf) return t;
  if (lower_cut == -kInf) {
    for (int k = 0; k <= std::min(max_row, max_col); ++k)
      t.entries[static_cast<std::size_t>(k) * static_cast<std::size_t>(t.cols) + static_cast<std::size_t>(k)] = 1.0;
    return t;
  }
  const auto psi = hermite_psi_table(top, lower_cut);
  std::vector<double> dpsi(psi.size());
  hermite_psi_prime_table(psi, lower_cut, dpsi);
  const auto diag = j_diag_all(std::min(max_row, max_col), lower_cut);
  for (int m = 0; m <= max_row; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    double* row = t.entries.data() + mi * static_cast<std::size_t>(t.cols);
    for (int n = 0; n <= max_col; ++n) {
      const auto ni = static_cast<std::size_t>(n);
      if (m == n) {
        row[ni] = diag[mi];
      } else if (n < m && n <= max_row && m <= max_col) {
        row[ni] = t.entries[ni * static_cast<std::size_t>(t.cols) + mi];  // mirror keeps exact symmetry
      } else {
        row[ni] = detail::wronskian_half_line(m, n, psi[mi], dpsi[mi], psi[ni], dpsi[ni]);
      }
    }
  }
  return t;
}

/// Square table 0..max_index. Throws CapabilityError above `cap`.
inline JTable build_jtable(double lower_cut, int max_index, int cap = kHermiteIndexCap) {
  return build_jtable_rect(lower_cut, max_index, max_index, cap);
}

/// Thread-safe memo of tables keyed by (cut, shape), bounded by total size.
/// Values are immutable snapshots, so the cache never changes results.
class JTableCache {
 public:
  explicit JTableCache(std::size_t max_bytes = std::size_t{64} << 20) : max_bytes_(max_bytes) {}

  std::shared_ptr<const JTable> get(double lower_cut, int max_row, int max_col, int cap = kHermiteTableCap) {
    const Key key{std::bit_cast<std::uint64_t>(lower_cut), max_row, max_col};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    auto table = std::make_shared<const JTable>(build_jtable_rect(lower_cut, max_row, max_col, cap));
    const std::size_t bytes = table->entries.size() * sizeof(double);
    std::lock_guard<std::mutex> lock(mutex_);
    ++misses_;
    if (bytes_ + bytes > max_bytes_) {
      entries_.clear();
      bytes_ = 0;
    }
    if (entries_.emplace(key, table).second) bytes_ += bytes;
    return table;
  }

  std::size_t hits() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return hits_;
  }
  std::size_t misses() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return misses_;
  }
  void clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.clear();
    bytes_ = 0;
  }

 private:
  struct Key {
    std::uint64_t cut;
    int rows, cols;
    auto operator<=>(const Key&) const = default;
  };
  std::size_t max_bytes_;
  std::size_t bytes_ = 0;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const JTable>> entries_;
  std::size_t hits_ = 0, misses_ = 0;
};

inline JTableCache& jtable_cache() {
  static JTableCache cache;
  return cache;
}

// ---------------------------------------------------------------------------
// Position regions as finite unions of disjoint open intervals.

struct Interval {
  double lo;
  double hi;
};

using Region = std::vector<Interval>;

inline Region normalize_region(Region r) {
  Region out;
  std::sort(r.begin(), r.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& iv : r) {
    if (!(iv.lo < iv.hi)) continue;
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

/// s = +1: x > cut; s = -1: x < cut.
inline Region sign_region(int s, double cut) {
  if (s == 1) return {{cut, kInf}};
  if (s == -1) return {{-kInf, cut}};
  throw std::invalid_argument("sign_region: s must be +1 or -1");
}

/// Window variable Q = sgn(x - hi) + sgn(-x + lo) + 1 about [lo, hi]:
/// s = +1 selects the outside, s = -1 the inside.
inline Region window_region(int s, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("window_region: requires lo < hi");
  if (s == 1) return {{-kInf, lo}, {hi, kInf}};
  if (s == -1) return {{lo, hi}};
  throw std::invalid_argument("window_region: s must be +1 or -1");
}

inline Region intersect(const Region& a, const Region& b) {
  Region out;
  for (const auto& x : a)
    for (const auto& y : b) {
      const double lo = std::max(x.lo, y.lo);
      const double hi = std::min(x.hi, y.hi);
      if (lo < hi) out.push_back({lo, hi});
    }
  return normalize_region(std::move(out));
}

/// Mirror image x -> -x.
inline Region reflect(const Region& a) {
  Region out;
  for (const auto& x : a) out.push_back({-x.hi, -x.lo});
  return normalize_region(std::move(out));
}

/// Affine image {(x - shift) / scale : x in R}, scale > 0.
inline Region rescale(const Region& a, double shift, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("rescale: scale must be positive");
  Region out;
  for (const auto& x : a) out.push_back({(x.lo - shift) / scale, (x.hi - shift) / scale});
  return out;
}

/// M_mn = integral over `region` of psi_m psi_n for m <= max_row,
/// n <= max_col, row-major in a JTable whose lower_cut is NaN. Each interval
/// (lo, hi) contributes J(lo, inf) - J(hi, inf); half-line tables come from
/// `cache` when one is given.
inline JTable region_matrix(const Region& region, int max_row, int max_col, JTableCache* cache = nullptr) {
  JTable out;
  out.lower_cut = std::numeric_limits<double>::quiet_NaN();
  out.rows = max_row + 1;
  out.cols = max_col + 1;
  out.entries.assign(static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols), 0.0);
  auto add = [&](double cut, double sign) {
    if (cut == kInf) return;
    std::shared_ptr<const JTable> t;
    if (cache)
      t = cache->get(cut, max_row, max_col);
    else
      t = std::make_shared<const JTable>(build_jtable_rect(cut, max_row, max_col));
    for (std::size_t k = 0; k < out.entries.size(); ++k) out.entries[k] += sign * t->entries[k];
  };
  for (const auto& iv : region) {
    add(iv.lo, 1.0);
    add(iv.hi, -1.0);
  }
  return out;
}

/// Row m = 0 of region_matrix, n = 0..n_max.
inline std::vector<double> region_row0(const Region& region, int n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (const auto& iv : region) {
    if (iv.lo != kInf) {
      const auto a = j0n_row(n_max, iv.lo);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += a[k];
    }
    if (iv.hi != kInf) {
      const auto b = j0n_row(n_max, iv.hi);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
    }
  }
  return out;
}

/// Integral over `region` of psi_m^2 for m = 0..m_max.
inline std::vector<double> region_diag(const Region& region, int m_max) {
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (const auto& iv : region) {
    const auto a = j_diag_all(m_max, iv.lo);
    const auto b = j_diag_all(m_max, iv.hi);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a[k] - b[k];
  }
  return out;
}

}  // namespace lgq
