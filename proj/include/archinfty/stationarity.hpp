#pragma once

#include <cmath>
#include <cstdint>

#include "archinfty/common.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"

namespace archinfty {

// ---------------------------------------------------------------------------
// Shock moments and process-level scalars
// ---------------------------------------------------------------------------

/// First and second shock moments plus the intercept. Requires
/// lambda1 > 0, a > 0 and lambda2 > lambda1^2 (non-degenerate shocks).
struct MomentSpec {
  double lambda1;
  double lambda2;
  double intercept;

  MomentSpec(double lambda1_, double lambda2_, double intercept_)
      : lambda1(lambda1_), lambda2(lambda2_), intercept(intercept_) {
    if (!(lambda1 > 0.0) || !std::isfinite(lambda1))
      throw std::invalid_argument("MomentSpec: lambda1 must be positive and finite");
    if (!(lambda2 > lambda1 * lambda1) || !std::isfinite(lambda2))
      throw std::invalid_argument("MomentSpec: lambda2 must exceed lambda1^2 (positive shock variance)");
    if (!(intercept > 0.0) || !std::isfinite(intercept))
      throw std::invalid_argument("MomentSpec: intercept must be positive and finite");
  }

  double sigma2() const { return lambda2 - lambda1 * lambda1; }
};

/// Verdict on the mean condition lambda1 * B < 1, through the bracket for B.
inline Verdict check_s1(const KernelSpec& kernel, const MomentSpec& moments, std::int64_t n_terms) {
  return strictly_below(weighted_kernel_sum(kernel, 1.0, n_terms).scaled(moments.lambda1), 1.0);
}

/// Bracket for the stationarity statistic
///   Omega = (sigma/lambda1) * sqrt(sum_{j>=1} z(j)^2).
///
/// The lower endpoint drops the tail; the upper endpoint adds a
/// block-extrapolated geometric tail estimate fitted on the trailing decade
/// of z^2 (robust to periodic zero patterns). The extrapolation is a
/// heuristic, not a proved bound: when the trailing blocks do not decay the
/// upper endpoint is +inf.
inline Interval compute_omega(const ResolventSeries& rs, const MomentSpec& moments) {
  const std::int64_t n = rs.horizon();
  long double s = 0.0L;
  for (std::int64_t j = n; j >= 1; --j) {
    const double zj = rs.z[static_cast<std::size_t>(j)];
    s += static_cast<long double>(zj) * zj;
  }
  const double partial = static_cast<double>(s);

  double tail = 0.0;
  if (n < 1) {
    // nothing computed beyond z(0): only the zero kernel pins the tail
    tail = rs.kernel.is_zero() ? 0.0 : kInf;
  }
  if (n >= 1) {
    const std::int64_t w = std::max<std::int64_t>(2, n / 10);
    if (n < 2 * w) {
      // horizon too short to extrapolate; only the identically-zero tail is safe
      bool zero_tail = true;
      for (std::int64_t j = 1; j <= n; ++j) zero_tail = zero_tail && rs.z[static_cast<std::size_t>(j)] == 0.0;
      tail = zero_tail ? 0.0 : kInf;
    } else {
      long double p1 = 0.0L, p0 = 0.0L;
      for (std::int64_t j = n - w + 1; j <= n; ++j) {
        const double zj = rs.z[static_cast<std::size_t>(j)];
        p1 += static_cast<long double>(zj) * zj;
      }
      for (std::int64_t j = n - 2 * w + 1; j <= n - w; ++j) {
        const double zj = rs.z[static_cast<std::size_t>(j)];
        p0 += static_cast<long double>(zj) * zj;
      }
      if (p1 == 0.0L) {
        tail = 0.0;  // a dead trailing block of z stays dead for finitely supported kernels
      } else if (p0 <= 0.0L || p1 >= p0) {
        tail = kInf;
      } else {
        const double g = static_cast<double>(p1 / p0);
        tail = static_cast<double>(p1) * g / (1.0 - g);
      }
    }
  }

  const double c = std::sqrt(moments.sigma2()) / moments.lambda1;
  return {c * std::sqrt(partial), std::isfinite(tail) ? c * std::sqrt(partial + tail) : kInf};
}

/// Verdict on Omega < 1 (existence of a weakly stationary solution,
/// given the mean condition).
inline Verdict check_s2(const ResolventSeries& rs, const MomentSpec& moments) {
  return strictly_below(compute_omega(rs, moments), 1.0);
}

/// Verdict on lambda2^(1/2) * B < 1 (the classical sufficient condition).
inline Verdict check_con2(const KernelSpec& kernel, const MomentSpec& moments, std::int64_t n_terms) {
  return strictly_below(weighted_kernel_sum(kernel, 1.0, n_terms).scaled(std::sqrt(moments.lambda2)), 1.0);
}

namespace detail {

inline Verdict verdict_and(Verdict a, Verdict b) {
  if (a == Verdict::FAILS || b == Verdict::FAILS) return Verdict::FAILS;
  if (a == Verdict::INDETERMINATE || b == Verdict::INDETERMINATE) return Verdict::INDETERMINATE;
  return Verdict::HOLDS;
}

}  // namespace detail

/// Verdict on lambda2 < lambda1^2 + (1 - lambda1 B)^2 / sum b(j)^2,
/// the resolvent-derived sufficient condition. Evaluated jointly with the
/// mean condition (the implication to stationarity needs both). For the
/// all-zero kernel the condition holds vacuously.
inline Verdict check_con3(const KernelSpec& kernel, const MomentSpec& moments, std::int64_t n_terms) {
  if (kernel.is_zero()) return Verdict::HOLDS;
  const Interval b = weighted_kernel_sum(kernel, 1.0, n_terms);
  const Interval bsq = squared_kernel_sum(kernel, n_terms);
  const double t_lo = 1.0 - moments.lambda1 * b.upper;
  const double t_hi = 1.0 - moments.lambda1 * b.lower;
  double sq_lo, sq_hi;
  if (t_lo <= 0.0 && t_hi >= 0.0) {
    sq_lo = 0.0;
    sq_hi = std::max(t_lo * t_lo, t_hi * t_hi);
  } else {
    sq_lo = std::min(t_lo * t_lo, t_hi * t_hi);
    sq_hi = std::max(t_lo * t_lo, t_hi * t_hi);
  }
  const double l1sq = moments.lambda1 * moments.lambda1;
  const Interval rhs{l1sq + (bsq.upper > 0.0 ? sq_lo / bsq.upper : kInf),
                     l1sq + (bsq.lower > 0.0 ? sq_hi / bsq.lower : kInf)};
  Verdict formula = Verdict::INDETERMINATE;
  if (moments.lambda2 < rhs.lower) formula = Verdict::HOLDS;
  else if (moments.lambda2 >= rhs.upper) formula = Verdict::FAILS;
  return detail::verdict_and(formula, check_s1(kernel, moments, n_terms));
}

/// Verdict on lambda1 B < (1 - Q) / (1 + Q) with Q = sum b^2 / B^2: the
/// regime where the resolvent-derived condition is weaker than the
/// classical one. Vacuously holds for the all-zero kernel.
inline Verdict check_newcondbetter(const KernelSpec& kernel, const MomentSpec& moments, std::int64_t n_terms) {
  if (kernel.is_zero()) return Verdict::HOLDS;
  const Interval b = weighted_kernel_sum(kernel, 1.0, n_terms);
  const Interval bsq = squared_kernel_sum(kernel, n_terms);
  if (!(b.lower > 0.0)) return Verdict::INDETERMINATE;
  const double q_lo = bsq.lower / (b.upper * b.upper);
  const double q_hi = std::isfinite(bsq.upper) ? bsq.upper / (b.lower * b.lower) : kInf;
  const double rhs_lo = std::isfinite(q_hi) ? (1.0 - q_hi) / (1.0 + q_hi) : -1.0;
  const double rhs_hi = (1.0 - q_lo) / (1.0 + q_lo);
  const double lhs_lo = moments.lambda1 * b.lower;
  const double lhs_hi = moments.lambda1 * b.upper;
  if (lhs_hi < rhs_lo) return Verdict::HOLDS;
  if (lhs_lo >= rhs_hi) return Verdict::FAILS;
  return Verdict::INDETERMINATE;
}

// ---------------------------------------------------------------------------
// Process scalars
// ---------------------------------------------------------------------------

struct ProcessScalars {
  double mean_x = 0.0;
  double e_nu_sq = 0.0;           // second moment of the martingale differences
  double var_x = 0.0;             // e_nu_sq * sum_{j>=0} z(j)^2
  double var_x_closed_form = 0.0; // same quantity through the Omega form
};

/// Stationary mean, E[nu(0)^2] and Var[X(0)]. Requires the mean and
/// stationarity conditions to hold; interval-valued inputs enter at their
/// midpoints.
inline ProcessScalars process_scalars(const KernelSpec& kernel, const MomentSpec& moments,
                                      const ResolventSeries& rs) {
  const std::int64_t n_terms = std::max<std::int64_t>(rs.horizon(), 1);
  if (check_s1(kernel, moments, n_terms) != Verdict::HOLDS)
    throw hypothesis_error("process_scalars: mean condition lambda1 B < 1 not established");
  const Interval omega = compute_omega(rs, moments);
  if (strictly_below(omega, 1.0) != Verdict::HOLDS)
    throw hypothesis_error("process_scalars: no stationary solution (Omega < 1 not established)");

  const double b_mid = weighted_kernel_sum(kernel, 1.0, n_terms).midpoint();
  const double denom = 1.0 - moments.lambda1 * b_mid;
  const double sigma2 = moments.sigma2();
  const double omega_sq = 0.5 * (omega.lower * omega.lower + omega.upper * omega.upper);
  const double zsq_sum = 1.0 + omega_sq * moments.lambda1 * moments.lambda1 / sigma2;

  ProcessScalars out;
  out.mean_x = moments.intercept * moments.lambda1 / denom;
  const double base = moments.intercept * std::sqrt(sigma2) / denom;
  out.e_nu_sq = base * base / (1.0 - omega_sq);
  out.var_x = out.e_nu_sq * zsq_sum;
  out.var_x_closed_form =
      base * base * (1.0 + moments.lambda1 * moments.lambda1 * omega_sq / sigma2) / (1.0 - omega_sq);
  return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct StationarityReport {
  Verdict s1 = Verdict::INDETERMINATE;
  Interval omega;
  Verdict s2 = Verdict::INDETERMINATE;
  Verdict con2 = Verdict::INDETERMINATE;
  Verdict con3 = Verdict::INDETERMINATE;
  Verdict newcondbetter = Verdict::INDETERMINATE;
  bool scalars_valid = false;
  double mean_x = std::numeric_limits<double>::quiet_NaN();
  double e_nu_sq = std::numeric_limits<double>::quiet_NaN();
  double var_x = std::numeric_limits<double>::quiet_NaN();
};

inline StationarityReport stationarity_report(const KernelSpec& kernel, const MomentSpec& moments,
                                              const ResolventSeries& rs) {
  const std::int64_t n_terms = std::max<std::int64_t>(rs.horizon(), 1);
  StationarityReport rep;
  rep.s1 = check_s1(kernel, moments, n_terms);
  rep.omega = compute_omega(rs, moments);
  rep.s2 = strictly_below(rep.omega, 1.0);
  rep.con2 = check_con2(kernel, moments, n_terms);
  rep.con3 = check_con3(kernel, moments, n_terms);
  rep.newcondbetter = check_newcondbetter(kernel, moments, n_terms);
  if (rep.s1 == Verdict::HOLDS && rep.s2 == Verdict::HOLDS) {
    const ProcessScalars s = process_scalars(kernel, moments, rs);
    rep.scalars_valid = true;
    rep.mean_x = s.mean_x;
    rep.e_nu_sq = s.e_nu_sq;
    rep.var_x = s.var_x;
  }
  return rep;
}

}  // namespace archinfty
