#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "archinfty/autocovariance.hpp"
#include "archinfty/common.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"
#include "archinfty/stationarity.hpp"

namespace archinfty {

/// Inclusive index window [lo, hi].
struct IndexWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Trailing share of a horizon; the default mirrors the reporting policy of
/// taking medians over the last 20% of computed indices.
inline IndexWindow trailing_window(std::int64_t horizon, double fraction = 0.2) {
  const auto lo = static_cast<std::int64_t>(std::floor(static_cast<double>(horizon) * (1.0 - fraction)));
  return {std::max<std::int64_t>(2, lo), horizon};
}

namespace detail {

inline double median_in_place(std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[static_cast<std::size_t>(mid)];
}

struct LeastSquares {
  double slope = 0.0, intercept = 0.0, rms_residual = 0.0, max_positive_residual = 0.0;
};

inline LeastSquares fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LeastSquares out;
  out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  out.intercept = my - out.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (out.intercept + out.slope * x[i]);
    ss += r * r;
    out.max_positive_residual = std::max(out.max_positive_residual, r);
  }
  out.rms_residual = std::sqrt(ss / n);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ratio-limit checks
//
// Under the weight-class hypotheses the three ratios converge:
//   z(n)/b(n)     -> lambda1 / (1 - lambda1 sum_j b(j) r^-j)^2
//   chi(n)/z(n)   -> 1 / (1 - lambda1 sum_j b(j) r^j)
//   rho(n)/b(n)   -> E[nu^2] * lambda1
//                    / ((1 - lambda1 sum_j b(j) r^j)(1 - lambda1 sum_j b(j) r^-j)^2)
// The rho/b target at r = 1 collapses to lambda1 E[nu^2] / (1 - lambda1 B)^3,
// which is used directly instead of summing rho over all lags (one fewer
// truncation error source). The weighted kernel sums run over j >= 1; the
// kernel has no index-0 term.
// ---------------------------------------------------------------------------

enum class RatioKind { z_over_b, chi_over_z, rho_over_b };

inline const char* to_string(RatioKind k) {
  switch (k) {
    case RatioKind::z_over_b: return "z_over_b";
    case RatioKind::chi_over_z: return "chi_over_z";
    default: return "rho_over_b";
  }
}

struct RatioLimitResult {
  double empirical = 0.0;  // median of the ratio over the window
  double target = 0.0;
  double rel_err = 0.0;
  std::vector<double> class_medians;  // per residue class when the kernel declares a period
  std::int64_t points = 0;
};

inline RatioLimitResult ratio_limit_check(RatioKind kind, const KernelSpec& kernel, const MomentSpec& moments,
                                          const ResolventSeries& rs, double r, IndexWindow window) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("ratio_limit_check: r must be in (0,1]");
  if (window.lo < 1 || window.hi > rs.horizon() || window.lo > window.hi)
    throw std::invalid_argument("ratio_limit_check: window outside the computed horizon");

  const std::int64_t n_terms = std::max<std::int64_t>(rs.horizon(), 1);
  const Interval heavy = weighted_kernel_sum(kernel, 1.0 / r, n_terms);
  if (!(moments.lambda1 * heavy.upper < 1.0))
    throw hypothesis_error("ratio_limit_check: lambda1 * sum b(j) r^-j < 1 not established");
  const double heavy_mid = heavy.midpoint();
  const double light_mid = weighted_kernel_sum(kernel, r, n_terms).midpoint();

  double target = 0.0;
  switch (kind) {
    case RatioKind::z_over_b: {
      const double den = 1.0 - moments.lambda1 * heavy_mid;
      target = moments.lambda1 / (den * den);
      break;
    }
    case RatioKind::chi_over_z: {
      target = 1.0 / (1.0 - moments.lambda1 * light_mid);
      break;
    }
    case RatioKind::rho_over_b: {
      const ProcessScalars s = process_scalars(kernel, moments, rs);
      const double den = 1.0 - moments.lambda1 * heavy_mid;
      target = s.e_nu_sq * moments.lambda1 / ((1.0 - moments.lambda1 * light_mid) * den * den);
      break;
    }
  }

  const double e_nu_sq =
      kind == RatioKind::rho_over_b ? process_scalars(kernel, moments, rs).e_nu_sq : 0.0;

  const std::int64_t period = kernel.period();
  std::vector<double> all;
  std::vector<std::vector<double>> per_class(static_cast<std::size_t>(period));
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    double value = 0.0;
    switch (kind) {
      case RatioKind::z_over_b: {
        const double bn = kernel(n);
        if (!(bn > 0.0)) continue;
        value = rs.z[static_cast<std::size_t>(n)] / bn;
        break;
      }
      case RatioKind::chi_over_z: {
        const double zn = rs.z[static_cast<std::size_t>(n)];
        if (!(zn > 0.0)) continue;
        value = chi_z(rs, n) / zn;
        break;
      }
      case RatioKind::rho_over_b: {
        const double bn = kernel(n);
        if (!(bn > 0.0)) continue;
        value = e_nu_sq * chi_z(rs, n) / bn;
        break;
      }
    }
    all.push_back(value);
    per_class[static_cast<std::size_t>(n % period)].push_back(value);
  }
  if (all.empty()) throw std::domain_error("ratio_limit_check: no valid points in the window (b or z vanish)");

  RatioLimitResult out;
  out.points = static_cast<std::int64_t>(all.size());
  out.empirical = detail::median_in_place(all);
  out.target = target;
  out.rel_err = std::abs(out.empirical - target) / std::abs(target);
  if (period > 1) {
    out.class_medians.resize(static_cast<std::size_t>(period));
    for (std::size_t c = 0; c < per_class.size(); ++c)
      out.class_medians[c] = detail::median_in_place(per_class[c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-periodic power-law constants
//
// For b(2n+1) = a0 (2n+1)^-alpha, b(2n) = a1 (2n)^-alpha the resolvent and
// chi split into even/odd subsequences with distinct limits against
// phi(n) = n^-alpha: the decay ratios oscillate and never settle on a single
// constant, which is the whole point of the example.
// ---------------------------------------------------------------------------

struct Periodic2Constants {
  double a0 = 0.0, a1 = 0.0, alpha = 2.0, lambda1 = 1.0;
  double s0 = 0.0, s1 = 0.0;  // lambda1-weighted odd/even kernel class sums
  double lam = 0.0;           // ((1-s1)^2 - s0^2)^-2
  double t0 = 0.0, t1 = 0.0;
  double d0 = 0.0, d1 = 0.0;            // z(2n)/phi(2n), z(2n+1)/phi(2n+1) limits
  double sum_z_even = 0.0, sum_z_odd = 0.0;
  double tau0 = 0.0, tau1 = 0.0;
  double ratio_even = 0.0, ratio_odd = 0.0;  // chi(2k)/b(2k), chi(2k+1)/b(2k+1) limits
};

inline Periodic2Constants periodic2_constants(double a0, double a1, double alpha, double lambda1) {
  if (!(a0 >= 0.0 && a1 >= 0.0)) throw std::invalid_argument("periodic2_constants: scales must be >= 0");
  if (!(alpha > 1.0)) throw std::invalid_argument("periodic2_constants: alpha must be > 1");
  if (!(lambda1 > 0.0)) throw std::invalid_argument("periodic2_constants: lambda1 must be positive");

  Periodic2Constants out;
  out.a0 = a0;
  out.a1 = a1;
  out.alpha = alpha;
  out.lambda1 = lambda1;
  out.s0 = lambda1 * a0 * residue_class_power_sum(2, 1, alpha);
  out.s1 = lambda1 * a1 * residue_class_power_sum(2, 2, alpha);
  if (!(out.s0 + out.s1 < 1.0))
    throw hypothesis_error("periodic2_constants: S0 + S1 < 1 required (sum condition fails)");

  const double den = (1.0 - out.s1) * (1.0 - out.s1) - out.s0 * out.s0;
  out.lam = 1.0 / (den * den);
  out.t0 = out.lam * 2.0 * out.s0 * (1.0 - out.s1);
  out.t1 = out.lam * (out.s0 * out.s0 + (1.0 - out.s1) * (1.0 - out.s1));
  out.d0 = a0 * out.t0 + a1 * out.t1;
  out.d1 = a1 * out.t0 + a0 * out.t1;
  out.sum_z_even = (1.0 - out.s1) / den;
  out.sum_z_odd = out.s0 / den;
  out.tau0 = out.t0 * out.sum_z_even + out.t1 * out.sum_z_odd;
  out.tau1 = out.t1 * out.sum_z_even + out.t0 * out.sum_z_odd;
  out.ratio_even = a1 > 0.0 ? (a0 / a1) * out.tau0 + out.tau1 : kInf;
  out.ratio_odd = a0 > 0.0 ? (a1 / a0) * out.tau0 + out.tau1 : kInf;
  return out;
}

/// The kernel realizing the two-periodic constants.
inline KernelSpec periodic2_kernel(double a0, double a1, double alpha) {
  return KernelSpec::periodic_power_law({a0, a1}, alpha);
}

// ---------------------------------------------------------------------------
// Three-periodic constants with a vanishing residue class
//
// b(n) = 0 on multiples of 3 and n^-2 elsewhere. The per-class limits of
// z(n) n^2 are K d_i; the chi limits carry the same K factor through the
// class sums of z, so the liminf/limsup targets below are K min(c) and
// K max(c).
// ---------------------------------------------------------------------------

struct Periodic3Constants {
  double lambda1 = 0.0;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  double k_factor = 0.0;  // lambda1 / (1 - s0^3 - 3 s0 s1 - s1^3)^2
  std::array<double, 3> d{};            // class polynomials; class i is n = i (mod 3)
  std::array<double, 3> sum_z_class{};  // sum of z over n = i (mod 3)
  std::array<double, 3> c{};
  double liminf_z_over_phi = 0.0;    // K * min d
  double liminf_chi_over_phi = 0.0;  // K * min c
  double limsup_chi_over_phi = 0.0;  // K * max c
};

/// The kernel of the three-periodic example.
inline KernelSpec periodic3_kernel() { return KernelSpec::periodic_power_law({1.0, 1.0, 0.0}, 2.0); }

inline Periodic3Constants periodic3_constants(double lambda1) {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("periodic3_constants: lambda1 must be positive");
  Periodic3Constants out;
  out.lambda1 = lambda1;
  out.s0 = lambda1 * residue_class_power_sum(3, 1, 2.0);
  out.s1 = lambda1 * residue_class_power_sum(3, 2, 2.0);
  out.s2 = 0.0;
  if (!(out.s0 > 0.0 && out.s1 > 0.0 && out.s0 + out.s1 < 1.0))
    throw hypothesis_error("periodic3_constants: need S0, S1 > 0 and S0 + S1 < 1 (lambda1 too large)");

  const double s0 = out.s0, s1 = out.s1;
  const double det = 1.0 - s0 * s0 * s0 - 3.0 * s0 * s1 - s1 * s1 * s1;
  out.k_factor = lambda1 / (det * det);
  out.d[0] = std::pow(s0, 4) + 2.0 * s1 * (1.0 - s0 * s0 * s0) + 2.0 * s0 * (1.0 - s1 * s1 * s1) +
             3.0 * (s0 * s0 + s1 * s1) + std::pow(s1, 4);
  out.d[1] = 1.0 + 2.0 * s0 * s0 * s0 * (1.0 - s1) + 2.0 * s1 + 2.0 * s1 * s1 * s1 + std::pow(s1, 4) +
             3.0 * s0 * s0 * (1.0 + s1 * s1);
  out.d[2] = 1.0 + 2.0 * s1 * s1 * s1 * (1.0 - s0) + 2.0 * s0 + 2.0 * s0 * s0 * s0 + std::pow(s0, 4) +
             3.0 * s1 * s1 * (1.0 + s0 * s0);

  // class sums of z solve a 3x3 circulant system; Cramer closed forms
  out.sum_z_class[0] = (1.0 - s0 * s1) / det;
  out.sum_z_class[1] = (s0 + s1 * s1) / det;
  out.sum_z_class[2] = (s0 * s0 + s1) / det;

  out.c[0] = out.d[0] * out.sum_z_class[0] + out.d[1] * out.sum_z_class[1] + out.d[2] * out.sum_z_class[2];
  out.c[1] = out.d[1] * out.sum_z_class[0] + out.d[2] * out.sum_z_class[1] + out.d[0] * out.sum_z_class[2];
  out.c[2] = out.d[2] * out.sum_z_class[0] + out.d[0] * out.sum_z_class[1] + out.d[1] * out.sum_z_class[2];

  out.liminf_z_over_phi = out.k_factor * std::min({out.d[0], out.d[1], out.d[2]});
  out.liminf_chi_over_phi = out.k_factor * std::min({out.c[0], out.c[1], out.c[2]});
  out.limsup_chi_over_phi = out.k_factor * std::max({out.c[0], out.c[1], out.c[2]});
  return out;
}

// ---------------------------------------------------------------------------
// Decay-shape fits
// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;          // least-squares slope of log seq(n) against log n
  double rms_residual = 0.0;
  double sup_statistic = 0.0;  // max of log seq(n) / log n over the window
  std::int64_t excluded = 0;   // non-positive entries skipped
  std::int64_t points = 0;
  bool superpolynomial = false;  // slope fell below the configured floor
};

/// Polynomial-decay probe: the regression slope estimates the decay
/// exponent when log seq(n) / log n converges; the windowed max serves the
/// limsup variant. A slope below the floor has no meaningful polynomial
/// reading and is flagged superpolynomial instead.
inline SlopeFit loglog_slope(const std::function<double(std::int64_t)>& seq, IndexWindow window,
                             double superpolynomial_floor = -50.0) {
  if (window.lo < 2 || window.lo > window.hi) throw std::invalid_argument("loglog_slope: window must satisfy 2 <= lo <= hi");
  std::vector<double> xs, ys;
  SlopeFit out;
  out.sup_statistic = -kInf;
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double v = seq(n);
    if (!(v > 0.0)) {
      ++out.excluded;
      continue;
    }
    const double ln = std::log(static_cast<double>(n));
    xs.push_back(ln);
    ys.push_back(std::log(v));
    out.sup_statistic = std::max(out.sup_statistic, std::log(v) / ln);
  }
  if (xs.size() < 2) throw std::domain_error("loglog_slope: fewer than two positive entries in the window");
  const detail::LeastSquares ls = detail::fit_line(xs, ys);
  out.slope = ls.slope;
  out.rms_residual = ls.rms_residual;
  out.points = static_cast<std::int64_t>(xs.size());
  out.superpolynomial = out.slope < superpolynomial_floor;
  return out;
}

struct GeometricFit {
  double rate = 0.0;   // fitted alpha in seq(k) ~ scale * alpha^k
  double scale = 0.0;
  double max_positive_residual = 0.0;  // in log units
  double rms_residual = 0.0;
  std::int64_t excluded = 0;
  bool ok = false;  // rate < 1 and the fit certifies an empirical geometric bound
};

/// Geometric-decay probe: fit log seq(k) ~ log scale + k log rate. The fit
/// certifies seq(k) <= (scale * e^max_residual) * rate^k on the window, so
/// ok demands rate < 1 and a small worst positive residual.
inline GeometricFit geometric_fit(const std::function<double(std::int64_t)>& seq, IndexWindow window,
                                  double residual_tol = 0.05) {
  if (window.lo < 0 || window.lo > window.hi) throw std::invalid_argument("geometric_fit: bad window");
  std::vector<double> xs, ys;
  GeometricFit out;
  for (std::int64_t k = window.lo; k <= window.hi; ++k) {
    const double v = seq(k);
    if (!(v > 0.0)) {
      ++out.excluded;
      continue;
    }
    xs.push_back(static_cast<double>(k));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) throw std::domain_error("geometric_fit: fewer than two positive entries in the window");
  const detail::LeastSquares ls = detail::fit_line(xs, ys);
  out.rate = std::exp(ls.slope);
  out.scale = std::exp(ls.intercept);
  out.max_positive_residual = ls.max_positive_residual;
  out.rms_residual = ls.rms_residual;
  out.ok = out.rate < 1.0 && out.max_positive_residual <= residual_tol;
  return out;
}

struct SupRatioResult {
  double sup_ratio = 0.0;
  std::int64_t arg_max = 0;
  std::vector<std::pair<std::int64_t, double>> running;  // (n, running sup up to n)
};

/// Windowed running supremum of seq(n) / gamma(n); probes one- and
/// two-sided comparison bounds against a reference decay gamma.
inline SupRatioResult bound_ratio_sup(const std::function<double(std::int64_t)>& seq,
                                      const std::function<double(std::int64_t)>& gamma, IndexWindow window) {
  if (window.lo > window.hi) throw std::invalid_argument("bound_ratio_sup: bad window");
  SupRatioResult out;
  out.sup_ratio = -kInf;
  for (std::int64_t n = window.lo; n <= window.hi; ++n) {
    const double g = gamma(n);
    if (!(g > 0.0)) throw std::domain_error("bound_ratio_sup: gamma must be positive on the window");
    const double ratio = seq(n) / g;
    if (ratio > out.sup_ratio) {
      out.sup_ratio = ratio;
      out.arg_max = n;
    }
    out.running.emplace_back(n, out.sup_ratio);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundle for reporting
// ---------------------------------------------------------------------------

struct DecayDiagnostics {
  RatioLimitResult z_over_b, chi_over_z, rho_over_b;
  bool z_over_b_ok = false, chi_over_z_ok = false, rho_over_b_ok = false;
  SlopeFit rho_loglog;
  GeometricFit rho_geometric;
  WrReport kernel_wr;
  bool kernel_wr_valid = false;  // the diagnostic needs a strictly positive kernel
  std::vector<std::pair<std::int64_t, double>> series_z_over_b, series_chi_over_z, series_rho_over_b;
};

struct DecayDiagnosticsOptions {
  double r = 1.0;
  IndexWindow ratio_window{0, 0};  // {0,0}: trailing 20% of the usable range
  double ratio_tol = 0.05;
  double geo_tol = 0.05;
  std::int64_t series_samples = 200;
  std::vector<std::int64_t> wr_m_grid{5, 10, 20, 40};
};

inline DecayDiagnostics decay_diagnostics(const KernelSpec& kernel, const MomentSpec& moments,
                                          const ResolventSeries& rs, const DecayDiagnosticsOptions& opts = {}) {
  const std::int64_t n = rs.horizon();
  IndexWindow w = opts.ratio_window;
  if (w.lo == 0 && w.hi == 0) w = trailing_window(n / 2);
  DecayDiagnostics out;
  out.z_over_b = ratio_limit_check(RatioKind::z_over_b, kernel, moments, rs, opts.r, w);
  out.chi_over_z = ratio_limit_check(RatioKind::chi_over_z, kernel, moments, rs, opts.r, w);
  out.rho_over_b = ratio_limit_check(RatioKind::rho_over_b, kernel, moments, rs, opts.r, w);
  out.z_over_b_ok = out.z_over_b.rel_err <= opts.ratio_tol;
  out.chi_over_z_ok = out.chi_over_z.rel_err <= opts.ratio_tol;
  out.rho_over_b_ok = out.rho_over_b.rel_err <= opts.ratio_tol;

  const ProcessScalars scalars = process_scalars(kernel, moments, rs);
  const auto rho_at = [&](std::int64_t k) { return scalars.e_nu_sq * chi_z(rs, k); };
  out.rho_loglog = loglog_slope(rho_at, {std::max<std::int64_t>(2, w.hi / 10), w.hi});
  out.rho_geometric = geometric_fit(rho_at, {1, w.hi}, opts.geo_tol);

  // the convolution statistic is quadratic in its horizon; cap it
  const std::int64_t wr_horizon = std::min<std::int64_t>(n, 4000);
  if (wr_horizon > 2 * opts.wr_m_grid.back()) {
    try {
      out.kernel_wr =
          wr_diagnostic([&](std::int64_t j) { return kernel(j); }, opts.r, wr_horizon, opts.wr_m_grid);
      out.kernel_wr_valid = true;
    } catch (const std::domain_error&) {
      // kernels with zero entries have no positive-sequence diagnostic
    }
  }

  const std::int64_t stride = std::max<std::int64_t>(1, (w.hi - w.lo + 1) / opts.series_samples);
  for (std::int64_t m = w.lo; m <= w.hi; m += stride) {
    const double bm = kernel(m);
    const double zm = rs.z[static_cast<std::size_t>(m)];
    if (bm > 0.0) out.series_z_over_b.emplace_back(m, zm / bm);
    if (zm > 0.0) out.series_chi_over_z.emplace_back(m, chi_z(rs, m) / zm);
    if (bm > 0.0) out.series_rho_over_b.emplace_back(m, scalars.e_nu_sq * chi_z(rs, m) / bm);
  }
  return out;
}

}  // namespace archinfty
