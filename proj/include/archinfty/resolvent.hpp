#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "archinfty/common.hpp"
#include "archinfty/kernel.hpp"

namespace archinfty {

// ---------------------------------------------------------------------------
// Resolvent sequence
//
//   z(0) = 1,   z(n) = lambda1 * sum_{j=0}^{n-1} b(n-j) z(j),  n >= 1.
//
// z collects the power-series coefficients of 1/psi with
// psi(x) = 1 - lambda1 * sum_j b(j) x^j, and the moving-average weights of
// the stationary solution. Non-negative whenever b is.
// ---------------------------------------------------------------------------

struct ResolventSeries {
  std::vector<double> z;  // z[0..horizon]
  double lambda1 = 1.0;
  KernelSpec kernel = KernelSpec::zero();

  std::int64_t horizon() const { return static_cast<std::int64_t>(z.size()) - 1; }
};

/// Run the convolution recursion up to the given horizon. O(horizon^2);
/// inherently sequential in n, but the result is immutable and safe to
/// share afterwards.
inline ResolventSeries compute_resolvent(const KernelSpec& kernel, double lambda1, std::int64_t horizon) {
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1))
    throw std::invalid_argument("compute_resolvent: lambda1 must be positive and finite");
  if (horizon < 0) throw std::invalid_argument("compute_resolvent: horizon must be >= 0");

  ResolventSeries rs;
  rs.lambda1 = lambda1;
  rs.kernel = kernel;
  rs.z.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  rs.z[0] = 1.0;
  const std::vector<double> b = kernel.materialize(horizon);  // b[k-1] = b(k)
  for (std::int64_t n = 1; n <= horizon; ++n) {
    double acc = 0.0;
    const double* zp = rs.z.data();
    const double* bp = b.data();
    for (std::int64_t k = 1; k <= n; ++k) acc += bp[k - 1] * zp[n - k];
    const double value = lambda1 * acc;
    if (!std::isfinite(value)) {
      // explosive regime: saturate instead of letting 0 * inf poison the
      // remaining convolutions with NaNs
      for (std::int64_t m = n; m <= horizon; ++m) rs.z[static_cast<std::size_t>(m)] = kInf;
      break;
    }
    rs.z[static_cast<std::size_t>(n)] = value;
  }
  return rs;
}

/// Truncated check of the summation identity
///   sum_n z(n) w^n = 1 / (1 - lambda1 * sum_j b(j) w^j),
/// valid on the stationarity domain lambda1 * sum_j b(j) w^j < 1.
/// lhs carries the z-side truncation error, so the residual is a
/// diagnostic, not a bound.
struct SumIdentityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

inline SumIdentityResult resolvent_sum_identity(const ResolventSeries& rs, double weight = 1.0) {
  const Interval bw = weighted_kernel_sum(rs.kernel, weight, std::max<std::int64_t>(rs.horizon(), 1));
  if (!(rs.lambda1 * bw.upper < 1.0))
    throw hypothesis_error("resolvent_sum_identity: lambda1 * sum b(j) w^j < 1 not established");
  long double lhs = 0.0L;
  for (std::int64_t n = rs.horizon(); n >= 0; --n)
    lhs += rs.z[static_cast<std::size_t>(n)] * std::pow(weight, static_cast<double>(n));
  SumIdentityResult out;
  out.lhs = static_cast<double>(lhs);
  out.rhs = 1.0 / (1.0 - rs.lambda1 * bw.midpoint());
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

/// Max over a grid of |psi(x) D(x) - 1| with both power series truncated at
/// the computed horizon. Grid points must satisfy
/// lambda1 * sum_j b(j) |x|^j < 1.
inline double ztransform_max_residual(const ResolventSeries& rs, std::span<const std::complex<double>> grid) {
  double worst = 0.0;
  const std::int64_t n = rs.horizon();
  const std::vector<double> b = rs.kernel.materialize(n);
  for (const std::complex<double>& x : grid) {
    const double radius = std::abs(x);
    if (radius > 0.0) {
      const Interval bw = weighted_kernel_sum(rs.kernel, radius, std::max<std::int64_t>(n, 1));
      if (!(rs.lambda1 * bw.upper < 1.0))
        throw hypothesis_error("ztransform_max_residual: grid point outside the stationarity disc");
    }
    // Horner in both series
    std::complex<double> bsum = 0.0;
    for (std::int64_t k = n; k >= 1; --k) bsum = bsum * x + b[static_cast<std::size_t>(k - 1)];
    const std::complex<double> psi = 1.0 - rs.lambda1 * x * bsum;
    std::complex<double> d = 0.0;
    for (std::int64_t k = n; k >= 0; --k) d = d * x + rs.z[static_cast<std::size_t>(k)];
    worst = std::max(worst, std::abs(psi * d - 1.0));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Alternating bound iteration
//
//   U_1 = 1,
//   L_m     = 1 - (sum_{j>=1} z(j) r^j) U_m,
//   U_{m+1} = 1 - (sum_{j=1}^m z(j) r^j) L_m,
//
// both converging to 1 - lambda1 * sum_j b(j) r^j under
// lambda1 * sum_j b(j) r^-j < 1/2.
// ---------------------------------------------------------------------------

struct UlmResult {
  std::vector<double> upper;  // U_1..U_m_max
  std::vector<double> lower;  // L_1..L_m_max
  double target = 0.0;        // 1 - lambda1 * sum_j b(j) r^j
  bool tail_warning = false;  // z horizon may under-resolve the infinite sum
};

inline UlmResult ulm_iteration(const ResolventSeries& rs, double r, int m_max) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("ulm_iteration: r must be in (0,1]");
  if (m_max < 1) throw std::invalid_argument("ulm_iteration: m_max must be >= 1");
  const std::int64_t n = std::max<std::int64_t>(rs.horizon(), 1);
  const Interval heavy = weighted_kernel_sum(rs.kernel, 1.0 / r, n);
  if (!(rs.lambda1 * heavy.upper < 0.5))
    throw hypothesis_error("ulm_iteration: lambda1 * sum b(j) r^-j < 1/2 not established");

  // partial sums of z(j) r^j, j = 1..m
  std::vector<double> zpartial(static_cast<std::size_t>(m_max) + 1, 0.0);
  long double acc = 0.0L;
  for (std::int64_t j = 1; j <= std::min<std::int64_t>(m_max, rs.horizon()); ++j) {
    acc += rs.z[static_cast<std::size_t>(j)] * std::pow(r, static_cast<double>(j));
    zpartial[static_cast<std::size_t>(j)] = static_cast<double>(acc);
  }
  for (std::int64_t j = std::min<std::int64_t>(m_max, rs.horizon()) + 1; j <= m_max; ++j)
    zpartial[static_cast<std::size_t>(j)] = static_cast<double>(acc);

  long double zfull = 0.0L;
  for (std::int64_t j = rs.horizon(); j >= 1; --j)
    zfull += rs.z[static_cast<std::size_t>(j)] * std::pow(r, static_cast<double>(j));

  UlmResult out;
  const double last_term =
      rs.horizon() >= 1 ? rs.z.back() * std::pow(r, static_cast<double>(rs.horizon())) : 0.0;
  out.tail_warning = last_term > 1e-9 * std::max(static_cast<double>(zfull), 1e-300);
  out.target = 1.0 - rs.lambda1 * weighted_kernel_sum(rs.kernel, r, n).midpoint();
  out.upper.reserve(static_cast<std::size_t>(m_max));
  out.lower.reserve(static_cast<std::size_t>(m_max));
  double u = 1.0;
  for (int m = 1; m <= m_max; ++m) {
    const double l = 1.0 - static_cast<double>(zfull) * u;
    out.upper.push_back(u);
    out.lower.push_back(l);
    u = 1.0 - zpartial[static_cast<std::size_t>(m)] * l;
  }
  return out;
}

/// Invert the recursion: recover b(1..n) from z(0..n) and lambda1.
/// Exact inverse of compute_resolvent up to floating round-off.
inline std::vector<double> kernel_from_resolvent(std::span<const double> z, double lambda1) {
  if (z.empty() || z[0] != 1.0) throw std::domain_error("kernel_from_resolvent: z(0) must equal 1");
  if (!(lambda1 > 0.0)) throw std::invalid_argument("kernel_from_resolvent: lambda1 must be positive");
  const std::int64_t n = static_cast<std::int64_t>(z.size()) - 1;
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t m = 1; m <= n; ++m) {
    double conv = 0.0;
    for (std::int64_t j = 1; j < m; ++j) conv += b[static_cast<std::size_t>(m - j - 1)] * z[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(m - 1)] = z[static_cast<std::size_t>(m)] / lambda1 - conv;
  }
  return b;
}

/// Largest violation of the defining recursion over the computed series;
/// a self-check that the O(n^2) evaluation stayed numerically honest.
inline double resolvent_recursion_residual(const ResolventSeries& rs) {
  const std::int64_t n = rs.horizon();
  const std::vector<double> b = rs.kernel.materialize(n);
  double worst = 0.0;
  for (std::int64_t m = 1; m <= n; ++m) {
    double acc = 0.0;
    for (std::int64_t k = 1; k <= m; ++k) acc += b[static_cast<std::size_t>(k - 1)] * rs.z[static_cast<std::size_t>(m - k)];
    worst = std::max(worst, std::abs(rs.z[static_cast<std::size_t>(m)] - rs.lambda1 * acc));
  }
  return worst;
}

}  // namespace archinfty
