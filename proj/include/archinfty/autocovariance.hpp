#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "archinfty/common.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"
#include "archinfty/stationarity.hpp"

namespace archinfty {

// ---------------------------------------------------------------------------
// chi and the autocovariance function
//
//   chi(k) = sum_{j>=0} z(j) z(j+|k|),     rho(k) = E[nu(0)^2] * chi(k).
//
// Negative lags resolve to rho(|k|) by symmetry.
// ---------------------------------------------------------------------------

/// Truncated chi(k) = sum_{j=0}^{N-k} z(j) z(j+k). Lags beyond the horizon
/// are an error; lags close to it are merely poorly resolved (see the
/// report's tail flags).
inline double chi_z(const ResolventSeries& rs, std::int64_t lag) {
  if (lag < 0) throw std::invalid_argument("chi_z: lag must be >= 0");
  const std::int64_t n = rs.horizon();
  if (lag > n) throw horizon_error("chi_z: lag exceeds the computed horizon");
  long double acc = 0.0L;
  const double* z = rs.z.data();
  for (std::int64_t j = n - lag; j >= 0; --j)
    acc += static_cast<long double>(z[j]) * z[j + lag];
  return static_cast<double>(acc);
}

/// Theoretical autocovariance over lags 0..max_lag.
///
/// rho(k) = e_nu_sq * chi(k) by construction, so rho(0) agrees with
/// Var[X(0)] up to round-off. tail_flag marks lags whose chi sum lost a
/// non-negligible number of terms to truncation. max_lag is capped at
/// half the horizon unless allow_deep_lags is set, so that every chi value
/// retains at least half its summands.
struct AutocovReport {
  std::vector<double> rho;        // rho[0..max_lag]
  std::vector<double> chi;        // chi[0..max_lag]
  std::vector<unsigned char> tail_flag;
  double e_nu_sq = 0.0;
  std::int64_t horizon = 0;

  std::int64_t max_lag() const { return static_cast<std::int64_t>(rho.size()) - 1; }

  /// rho at a signed lag; negative lags resolve by symmetry.
  double rho_at(std::int64_t k) const { return rho.at(static_cast<std::size_t>(std::llabs(k))); }
};

inline AutocovReport autocovariance(const KernelSpec& kernel, const MomentSpec& moments,
                                    const ResolventSeries& rs, std::int64_t max_lag,
                                    bool allow_deep_lags = false) {
  if (max_lag < 0) throw std::invalid_argument("autocovariance: max_lag must be >= 0");
  const std::int64_t n = rs.horizon();
  if (!allow_deep_lags && max_lag > n / 2)
    throw std::invalid_argument("autocovariance: max_lag beyond horizon/2 (pass allow_deep_lags to override)");
  if (max_lag > n) throw horizon_error("autocovariance: max_lag exceeds the computed horizon");

  const ProcessScalars scalars = process_scalars(kernel, moments, rs);  // throws unless stationary

  AutocovReport rep;
  rep.e_nu_sq = scalars.e_nu_sq;
  rep.horizon = n;
  rep.chi.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  rep.rho.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  rep.tail_flag.assign(static_cast<std::size_t>(max_lag) + 1, 0);

  parallel_for(max_lag + 1, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      const double c = chi_z(rs, k);
      rep.chi[static_cast<std::size_t>(k)] = c;
      rep.rho[static_cast<std::size_t>(k)] = scalars.e_nu_sq * c;
      const double last_kept = rs.z[static_cast<std::size_t>(n - k)];
      rep.tail_flag[static_cast<std::size_t>(k)] = last_kept > 1e-8 * (1.0 + c) ? 1 : 0;
    }
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Consistency identities
// ---------------------------------------------------------------------------

/// Largest absolute residual of the infinite-history linear relation
///   rho(k) = lambda1 * sum_{j=-inf}^{k-1} b(k-j) rho(|j|),  k = 1..K,
/// with the lower limit truncated at -K. The truncated mass is estimated
/// from the kernel tail bound times rho(K) and reported alongside.
struct YuleWalkerResult {
  double max_residual = 0.0;
  std::int64_t arg_max = 0;
  double truncation_estimate = 0.0;
};

inline YuleWalkerResult yule_walker_residual(const AutocovReport& rep, const KernelSpec& kernel,
                                             const MomentSpec& moments) {
  const std::int64_t k_max = rep.max_lag();
  YuleWalkerResult out;
  if (k_max < 1) return out;
  const std::vector<double> b = kernel.materialize(2 * k_max);
  for (std::int64_t k = 1; k <= k_max; ++k) {
    long double acc = 0.0L;
    for (std::int64_t j = -k_max; j <= k - 1; ++j)
      acc += b[static_cast<std::size_t>(k - j - 1)] * rep.rho[static_cast<std::size_t>(std::llabs(j))];
    const double r = std::abs(rep.rho[static_cast<std::size_t>(k)] - moments.lambda1 * static_cast<double>(acc));
    if (r > out.max_residual) {
      out.max_residual = r;
      out.arg_max = k;
    }
  }
  const Interval btail = weighted_kernel_sum(kernel, 1.0, k_max);
  out.truncation_estimate = moments.lambda1 * (btail.upper - btail.lower) * rep.rho[static_cast<std::size_t>(k_max)];
  return out;
}

/// Recompute rho through the forced-recursion route
///   rho(k) = z(k) rho(0) + sum_{j=0}^{k-1} z(k-1-j) f(j),
///   f(j)   = lambda1 * sum_{l=1}^{J} b(j+l+1) rho(l),
/// and return max_k |rho_vp(k) - rho(k)| / rho(0). The forcing sum is
/// truncated at forcing_terms lags; the needed rho values are taken from
/// chi directly so the check does not depend on the report's lag cap.
inline double variation_of_parameters_discrepancy(const AutocovReport& rep, const KernelSpec& kernel,
                                                  const MomentSpec& moments, const ResolventSeries& rs,
                                                  std::int64_t forcing_terms) {
  const std::int64_t k_max = rep.max_lag();
  if (k_max < 1) return 0.0;
  if (forcing_terms < 1) throw std::invalid_argument("variation_of_parameters: forcing_terms must be >= 1");
  if (forcing_terms > rs.horizon())
    throw horizon_error("variation_of_parameters: forcing_terms exceeds the resolvent horizon");

  std::vector<double> rho_deep(static_cast<std::size_t>(forcing_terms) + 1, 0.0);
  parallel_for(forcing_terms + 1, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t l = lo; l < hi; ++l)
      rho_deep[static_cast<std::size_t>(l)] =
          l <= k_max ? rep.rho[static_cast<std::size_t>(l)] : rep.e_nu_sq * chi_z(rs, l);
  });

  const std::vector<double> b = kernel.materialize(k_max + forcing_terms + 1);
  std::vector<double> f(static_cast<std::size_t>(k_max), 0.0);
  for (std::int64_t j = 0; j < k_max; ++j) {
    long double acc = 0.0L;
    for (std::int64_t l = 1; l <= forcing_terms; ++l)
      acc += b[static_cast<std::size_t>(j + l)] * rho_deep[static_cast<std::size_t>(l)];  // b(j+l+1)
    f[static_cast<std::size_t>(j)] = moments.lambda1 * static_cast<double>(acc);
  }

  const double rho0 = rep.rho[0];
  double worst = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    long double vp = rs.z[static_cast<std::size_t>(k)] * static_cast<long double>(rho0);
    for (std::int64_t j = 0; j <= k - 1; ++j)
      vp += rs.z[static_cast<std::size_t>(k - 1 - j)] * static_cast<long double>(f[static_cast<std::size_t>(j)]);
    worst = std::max(worst, std::abs(static_cast<double>(vp) - rep.rho[static_cast<std::size_t>(k)]) / rho0);
  }
  return worst;
}

}  // namespace archinfty
