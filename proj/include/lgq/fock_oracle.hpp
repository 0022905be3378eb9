#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lgq/matrix_elements.hpp"
#include "lgq/measurement.hpp"
#include "lgq/quadrature.hpp"
#include "lgq/qpd_series.hpp"
#include "lgq/states.hpp"

namespace lgq {

/// Dense operator on span{|0>, ..., |dim-1>}.
struct FockOperator {
  int dim = 0;
  Eigen::MatrixXcd entries;

  double hermiticity_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
};

/// Thrown when the Fock truncation cannot hold the state to the requested
/// trace accuracy.
class TraceDeficitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleConfig {
  int dim = 300;        // truncation of the state
  int inner_dim = 0;    // intermediate index range; 0 selects dim (plain) or 8 dim (taper)
  bool taper = true;    // spectral taper on the intermediate index
  int pad = -1;         // extra levels while building the state; negative selects dim
  double trace_tol = 1e-8;

  int resolved_inner_dim() const {
    if (inner_dim > 0) return std::max(inner_dim, dim);
    return taper ? std::max(8 * dim, 2048) : dim;
  }
  int resolved_pad() const { return pad >= 0 ? pad : std::max(dim, 64); }

  void validate() const {
    if (dim < 2) throw std::invalid_argument("OracleConfig: dim must be >= 2");
    if (dim > 600) throw CapabilityError("OracleConfig: dim above 600");
    if (inner_dim < 0) throw std::invalid_argument("OracleConfig: inner_dim must be >= 0");
    if (!(trace_tol > 0.0)) throw std::invalid_argument("OracleConfig: trace_tol must be > 0");
  }
};

namespace detail {

// exp(i h T) applied to the columns of V, T real symmetric tridiagonal.
inline void apply_exp_i_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double h,
                                    Eigen::MatrixXcd& V) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& Q = es.eigenvectors();
  Eigen::MatrixXcd coeff = Q.transpose().cast<Complex>() * V;
  for (Eigen::Index i = 0; i < coeff.rows(); ++i) coeff.row(i) *= std::polar(1.0, h * es.eigenvalues()(i));
  V = Q.cast<Complex>() * coeff;
}

// S(zeta) = exp((zeta a^dag^2 - zeta^* a^2)/2) on the columns of V. With
// U = diag(e^{i theta n / 2}) and the i^k gauge on each parity sublattice the
// generator becomes i r T, T real tridiagonal with off-diagonals
// sqrt((n+1)(n+2))/2.
inline void apply_squeeze(double r, double theta0, Eigen::MatrixXcd& V) {
  if (r == 0.0) return;
  const Eigen::Index np = V.rows();
  for (Eigen::Index n = 0; n < np; ++n) V.row(n) *= std::polar(1.0, -0.5 * theta0 * static_cast<double>(n));
  for (int parity = 0; parity < 2; ++parity) {
    const Eigen::Index len = (np - parity + 1) / 2;
    if (len < 2) continue;
    Eigen::MatrixXcd sub(len, V.cols());
    for (Eigen::Index k = 0; k < len; ++k) sub.row(k) = V.row(2 * k + parity) * std::pow(Complex(0.0, 1.0), static_cast<int>(k % 4));
    Eigen::VectorXd d = Eigen::VectorXd::Zero(len);
    Eigen::VectorXd off(len - 1);
    for (Eigen::Index k = 0; k + 1 < len; ++k) {
      const double n = static_cast<double>(2 * k + parity);
      off(k) = 0.5 * std::sqrt((n + 1.0) * (n + 2.0));
    }
    apply_exp_i_tridiagonal(d, off, r, sub);
    for (Eigen::Index k = 0; k < len; ++k)
      V.row(2 * k + parity) = sub.row(k) * std::pow(Complex(0.0, -1.0), static_cast<int>(k % 4));
  }
  for (Eigen::Index n = 0; n < np; ++n) V.row(n) *= std::polar(1.0, 0.5 * theta0 * static_cast<double>(n));
}

// D(xi) = exp(xi a^dag - xi^* a) on the columns of V by scaled Taylor steps.
inline void apply_displacement(Complex xi, Eigen::MatrixXcd& V) {
  if (xi == Complex(0.0, 0.0)) return;
  const Eigen::Index np = V.rows();
  const double norm_bound = 2.0 * std::abs(xi) * std::sqrt(static_cast<double>(np));
  const int steps = std::max(1, static_cast<int>(std::ceil(norm_bound / 0.5)));
  const Complex h_xi = xi / static_cast<double>(steps);
  auto apply_g = [&](const Eigen::MatrixXcd& X) {
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(np, X.cols());
    for (Eigen::Index n = 0; n < np; ++n) {
      if (n > 0) Y.row(n) += h_xi * std::sqrt(static_cast<double>(n)) * X.row(n - 1);
      if (n + 1 < np) Y.row(n) -= std::conj(h_xi) * std::sqrt(static_cast<double>(n + 1)) * X.row(n + 1);
    }
    return Y;
  };
  for (int s = 0; s < steps; ++s) {
    Eigen::MatrixXcd term = V;
    Eigen::MatrixXcd acc = V;
    for (int k = 1; k < 60; ++k) {
      term = apply_g(term) / static_cast<double>(k);
      acc += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18 * std::max(1.0, acc.cwiseAbs().maxCoeff())) break;
    }
    V = acc;
  }
}

struct StateVectors {
  Eigen::MatrixXcd vectors;  // dim x count, columns D S |m>
  std::vector<double> weights;
  double trace = 0.0;
};

inline StateVectors build_state_vectors(const StateSpec& state, const OracleConfig& cfg) {
  const int dim = cfg.dim;
  const int np = dim + cfg.resolved_pad();
  int m_max = 0;
  if (state.n_th > 0.0) m_max = thermal_cutoff(state.n_th, 0.01 * cfg.trace_tol);
  if (m_max + 1 > dim) throw TraceDeficitError("rho_fock: thermal occupation needs more than dim levels");
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(np, m_max + 1);
  for (int m = 0; m <= m_max; ++m) V(m, m) = 1.0;
  apply_squeeze(state.r, state.theta0, V);
  apply_displacement(state.xi, V);
  StateVectors out;
  out.vectors = V.topRows(dim);
  out.weights.resize(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    out.weights[static_cast<std::size_t>(m)] = thermal_weight(m, state.n_th);
    out.trace += out.weights[static_cast<std::size_t>(m)] * out.vectors.col(m).squaredNorm();
  }
  if (1.0 - out.trace > cfg.trace_tol)
    throw TraceDeficitError("rho_fock: trace deficit " + std::to_string(1.0 - out.trace) + " exceeds tolerance at dim " +
                            std::to_string(dim));
  return out;
}

// Quadrature nodes covering `region` clipped to [-span, span].
inline QuadratureRule region_rule(const Region& region, double span, double max_wavenumber) {
  constexpr int order = 24;
  const double h = std::min(0.25, 16.0 / std::max(1.0, max_wavenumber));
  const QuadratureRule ref = gauss_legendre(order, -1.0, 1.0);
  QuadratureRule out;
  for (const auto& iv : region) {
    const double lo = std::max(iv.lo, -span), hi = std::min(iv.hi, span);
    if (!(lo < hi)) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
    const double ph = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * ph;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        out.nodes.push_back(mid + 0.5 * ph * ref.nodes[i]);
        out.weights.push_back(0.5 * ph * ref.weights[i]);
      }
    }
  }
  return out;
}

inline double oracle_span(int dim) { return std::sqrt(2.0 * dim + 1.0) + 12.0; }

// Y(k, j) = integral over region of psi_k(x) sum_n psi_n(x) U(n, j), k < rows.
inline Eigen::MatrixXcd region_apply(const Region& region, const Eigen::MatrixXcd& U, int rows) {
  const int dim = static_cast<int>(U.rows());
  const Eigen::Index cols = U.cols();
  const double kmax = std::sqrt(2.0 * rows + 1.0) + std::sqrt(2.0 * dim + 1.0);
  const QuadratureRule rule = region_rule(region, oracle_span(dim), kmax);
  Eigen::MatrixXd Ur(dim, 2 * cols);
  Ur.leftCols(cols) = U.real();
  Ur.rightCols(cols) = U.imag();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(rows, 2 * cols);
  const int top = std::max(rows, dim);
  constexpr Eigen::Index chunk = 256;
  Eigen::MatrixXd psi(top, chunk);
  std::vector<double> col(static_cast<std::size_t>(top));
  for (std::size_t start = 0; start < rule.size(); start += chunk) {
    const Eigen::Index len = static_cast<Eigen::Index>(std::min<std::size_t>(chunk, rule.size() - start));
    for (Eigen::Index i = 0; i < len; ++i) {
      hermite_psi_table(top - 1, rule.nodes[start + static_cast<std::size_t>(i)], col);
      for (int k = 0; k < top; ++k) psi(k, i) = col[static_cast<std::size_t>(k)];
    }
    // phi(x_i, j) weighted by the quadrature weight.
    Eigen::MatrixXd phi = psi.topLeftCorner(dim, len).transpose() * Ur;
    for (Eigen::Index i = 0; i < len; ++i) phi.row(i) *= rule.weights[start + static_cast<std::size_t>(i)];
    Y.noalias() += psi.topLeftCorner(rows, len) * phi;
  }
  Eigen::MatrixXcd out(rows, cols);
  out.real() = Y.leftCols(cols);
  out.imag() = Y.rightCols(cols);
  return out;
}

// Integral over region of |sum_n psi_n U(n, j)|^2 for each column j.
inline Eigen::VectorXd region_density(const Region& region, const Eigen::MatrixXcd& U) {
  const int dim = static_cast<int>(U.rows());
  const QuadratureRule rule = region_rule(region, oracle_span(dim), 2.0 * std::sqrt(2.0 * dim + 1.0));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(U.cols());
  std::vector<double> col(static_cast<std::size_t>(dim));
  Eigen::VectorXd psi(dim);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    hermite_psi_table(dim - 1, rule.nodes[i], col);
    for (int k = 0; k < dim; ++k) psi(k) = col[static_cast<std::size_t>(k)];
    const Eigen::VectorXcd phi = U.transpose() * psi.cast<Complex>();
    out += rule.weights[i] * phi.cwiseAbs2();
  }
  return out;
}

inline Eigen::MatrixXcd evolve_columns(const Eigen::MatrixXcd& V, double phase_per_level) {
  Eigen::MatrixXcd out = V;
  for (Eigen::Index k = 0; k < V.rows(); ++k) out.row(k) *= std::polar(1.0, phase_per_level * static_cast<double>(k));
  return out;
}

}  // namespace detail

/// <m| theta_s(t) |n> for m, n < dim by direct quadrature of psi_m psi_n over
/// the selected region, with Heisenberg phases e^{i (m - n) w t}.
inline FockOperator projector_matrix(const MeasurementSpec& meas, double t, int dim, int s = 1,
                                     const UnitsConfig& units = {}) {
  meas.validate();
  if (dim < 1 || dim > 600) throw CapabilityError("projector_matrix: dim must be in [1, 600]");
  const Region region = meas.region(s, t, units);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(dim, dim);
  FockOperator P;
  P.dim = dim;
  P.entries = detail::region_apply(region, eye, dim);
  P.entries = 0.5 * (P.entries + P.entries.transpose()).eval();
  const double wt = units.omega * t;
  for (int m = 0; m < dim; ++m)
    for (int n = 0; n < dim; ++n) P.entries(m, n) *= std::polar(1.0, (m - n) * wt);
  return P;
}

/// Density matrix of the thermal squeezed coherent state truncated to dim.
inline FockOperator rho_fock(const StateSpec& state, int dim, const OracleConfig& base = {}) {
  state.validate();
  OracleConfig cfg = base;
  cfg.dim = dim;
  cfg.validate();
  const auto sv = detail::build_state_vectors(state, cfg);
  FockOperator rho;
  rho.dim = dim;
  rho.entries = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index j = 0; j < sv.vectors.cols(); ++j)
    rho.entries += sv.weights[static_cast<std::size_t>(j)] * sv.vectors.col(j) * sv.vectors.col(j).adjoint();
  return rho;
}

/// Tr(rho a).
inline Complex annihilation_expectation(const FockOperator& rho) {
  Complex acc = 0.0;
  for (int n = 1; n < rho.dim; ++n) acc += std::sqrt(static_cast<double>(n)) * rho.entries(n, n - 1);
  return acc;
}

struct OracleResult {
  std::array<std::array<double, 2>, 2> q{};  // q[(1 - s1)/2][(1 - s2)/2]
  double trace = 0.0;
  int inner_dim = 0;
  bool collapsed = false;

  double at(int s1, int s2) const { return q[static_cast<std::size_t>((1 - s1) / 2)][static_cast<std::size_t>((1 - s2) / 2)]; }
};

/// All four q_{s1,s2} = Re Tr[P_{s2}(t2) F P_{s1}(t1) rho] by matrix
/// mechanics in the number basis, F the optional spectral taper on the
/// intermediate index. When w (t2 - t1) is an exact multiple of pi the two
/// projectors commute and the trace is evaluated as a single region
/// integral of the wavefunction.
inline OracleResult qpd_oracle_all(const StateSpec& state, const MeasurementSpec& meas, double t1, double t2,
                                   const OracleConfig& cfg = {}, const UnitsConfig& units = {}) {
  state.validate();
  meas.validate();
  cfg.validate();
  units.validate();
  if (!std::isfinite(t1) || !std::isfinite(t2)) throw std::invalid_argument("qpd_oracle: non-finite time");
  const auto sv = detail::build_state_vectors(state, cfg);
  const int dim = cfg.dim;
  OracleResult res;
  res.trace = sv.trace;

  const double w1 = units.omega * t1, w2 = units.omega * t2;
  const Eigen::MatrixXcd u1 = detail::evolve_columns(sv.vectors, -w1);
  const int cls = detail::coincidence_class(w2 - w1);
  if (cls >= 0) {
    res.collapsed = true;
    res.inner_dim = dim;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const int s1 = 1 - 2 * a, s2 = 1 - 2 * b;
        const Region r1 = normalize_region(meas.region(s1, t1, units));
        const Region r2 = normalize_region(meas.region(s2, t2, units));
        const Region joint = cls == 0 ? intersect(r1, r2) : intersect(r1, reflect(r2));
        const Eigen::VectorXd dens = detail::region_density(joint, u1);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < dens.size(); ++j) acc += sv.weights[static_cast<std::size_t>(j)] * dens(j);
        res.q[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
      }
    return res;
  }

  const int K = cfg.resolved_inner_dim();
  res.inner_dim = K;
  const Eigen::MatrixXcd u2 = detail::evolve_columns(sv.vectors, -w2);
  // Plus-outcome images; the minus outcome is the complement within the
  // intermediate space, whose identity part is u itself on the first dim levels.
  const Eigen::MatrixXcd y1p = detail::region_apply(normalize_region(meas.region(1, t1, units)), u1, K);
  const Eigen::MatrixXcd y2p = detail::region_apply(normalize_region(meas.region(1, t2, units)), u2, K);
  auto complement = [&](const Eigen::MatrixXcd& yp, const Eigen::MatrixXcd& u) {
    Eigen::MatrixXcd ym = -yp;
    ym.topRows(dim) += u;
    return ym;
  };
  const Eigen::MatrixXcd y1m = complement(y1p, u1);
  const Eigen::MatrixXcd y2m = complement(y2p, u2);
  Eigen::VectorXcd phase(K);
  for (int k = 0; k < K; ++k)
    phase(k) = std::polar(cfg.taper ? spectral_taper(k, K) : 1.0, (w1 - w2) * static_cast<double>(k));
  auto contract = [&](const Eigen::MatrixXcd& y1, const Eigen::MatrixXcd& y2) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < y1.cols(); ++j)
      acc += sv.weights[static_cast<std::size_t>(j)] *
             (y2.col(j).conjugate().cwiseProduct(phase).cwiseProduct(y1.col(j))).sum().real();
    return acc;
  };
  res.q[0][0] = contract(y1p, y2p);
  res.q[0][1] = contract(y1p, y2m);
  res.q[1][0] = contract(y1m, y2p);
  res.q[1][1] = contract(y1m, y2m);
  return res;
}

inline double qpd_oracle(const StateSpec& state, const MeasurementSpec& meas, int s1, int s2, double t1, double t2,
                         const OracleConfig& cfg = {}, const UnitsConfig& units = {}) {
  validate_outcomes(s1, s2);
  return qpd_oracle_all(state, meas, t1, t2, cfg, units).at(s1, s2);
}

}  // namespace lgq
