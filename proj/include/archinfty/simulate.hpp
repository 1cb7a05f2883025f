#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "archinfty/common.hpp"
#include "archinfty/kernel.hpp"
#include "archinfty/resolvent.hpp"
#include "archinfty/stationarity.hpp"

namespace archinfty {

// ---------------------------------------------------------------------------
// Deterministic splittable RNG
//
// xoshiro256++ seeded through splitmix64 from (seed, stream). Samplers are
// implemented directly on top of it so identical (seed, config, spec)
// reproduce bit-identical paths on every platform, and per-path streams are
// independent of scheduling.
// ---------------------------------------------------------------------------

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the polar method (spare value cached).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  /// Marsaglia-Tsang gamma sampler, shape > 0, unit scale.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      const double u = next_double();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Shock distributions (non-negative support, closed-form moments)
// ---------------------------------------------------------------------------

namespace detail {

struct ScaledBernoulliShock {
  double p, hi, lo;
};
struct ExponentialShock {
  double mean;
};
struct LogNormalShock {
  double mu, s;
};
struct UniformShock {
  double lo, hi;
};
struct GammaShock {
  double shape, scale;
};

}  // namespace detail

/// An i.i.d. non-negative shock law with first and second moments in
/// closed form. A degenerate (zero-variance) law is constructible for
/// deterministic-recursion checks but is flagged and rejected by the
/// stationarity machinery.
class ShockSpec {
 public:
  static ShockSpec scaled_bernoulli(double p, double hi, double lo) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("scaled_bernoulli: p must be in [0,1]");
    if (!(hi >= 0.0 && lo >= 0.0)) throw std::invalid_argument("scaled_bernoulli: support must be non-negative");
    return ShockSpec(detail::ScaledBernoulliShock{p, hi, lo});
  }
  static ShockSpec exponential(double mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean must be positive");
    return ShockSpec(detail::ExponentialShock{mean});
  }
  static ShockSpec log_normal(double mu, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("log_normal: s must be positive");
    return ShockSpec(detail::LogNormalShock{mu, s});
  }
  static ShockSpec uniform(double lo, double hi) {
    if (!(lo >= 0.0 && hi > lo)) throw std::invalid_argument("uniform: need 0 <= lo < hi");
    return ShockSpec(detail::UniformShock{lo, hi});
  }
  static ShockSpec gamma(double shape, double scale) {
    if (!(shape > 0.0 && scale > 0.0)) throw std::invalid_argument("gamma: shape and scale must be positive");
    return ShockSpec(detail::GammaShock{shape, scale});
  }
  /// xi == value almost surely; test-only degenerate law.
  static ShockSpec deterministic(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("deterministic: value must be positive");
    return ShockSpec(detail::ScaledBernoulliShock{1.0, value, 0.0});
  }

  double lambda1() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, detail::ScaledBernoulliShock>) return s.p * s.hi + (1.0 - s.p) * s.lo;
          else if constexpr (std::is_same_v<T, detail::ExponentialShock>) return s.mean;
          else if constexpr (std::is_same_v<T, detail::LogNormalShock>) return std::exp(s.mu + 0.5 * s.s * s.s);
          else if constexpr (std::is_same_v<T, detail::UniformShock>) return 0.5 * (s.lo + s.hi);
          else return s.shape * s.scale;
        },
        law_);
  }

  double lambda2() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, detail::ScaledBernoulliShock>)
            return s.p * s.hi * s.hi + (1.0 - s.p) * s.lo * s.lo;
          else if constexpr (std::is_same_v<T, detail::ExponentialShock>) return 2.0 * s.mean * s.mean;
          else if constexpr (std::is_same_v<T, detail::LogNormalShock>) return std::exp(2.0 * s.mu + 2.0 * s.s * s.s);
          else if constexpr (std::is_same_v<T, detail::UniformShock>)
            return (s.lo * s.lo + s.lo * s.hi + s.hi * s.hi) / 3.0;
          else return s.shape * (s.shape + 1.0) * s.scale * s.scale;
        },
        law_);
  }

  double sigma2() const { return lambda2() - lambda1() * lambda1(); }
  bool degenerate() const { return sigma2() <= 0.0; }

  /// Moments paired with an intercept, for the stationarity machinery.
  MomentSpec moments(double intercept) const { return MomentSpec(lambda1(), lambda2(), intercept); }

  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, detail::ScaledBernoulliShock>)
            return rng.next_double() < s.p ? s.hi : s.lo;
          else if constexpr (std::is_same_v<T, detail::ExponentialShock>)
            return -s.mean * std::log1p(-rng.next_double());
          else if constexpr (std::is_same_v<T, detail::LogNormalShock>)
            return std::exp(s.mu + s.s * rng.next_normal());
          else if constexpr (std::is_same_v<T, detail::UniformShock>)
            return s.lo + (s.hi - s.lo) * rng.next_double();
          else
            return s.scale * rng.next_gamma(s.shape);
        },
        law_);
  }

  using Law = std::variant<detail::ScaledBernoulliShock, detail::ExponentialShock, detail::LogNormalShock,
                           detail::UniformShock, detail::GammaShock>;
  const Law& law() const { return law_; }

 private:
  explicit ShockSpec(Law law) : law_(law) {}
  Law law_;
};

// ---------------------------------------------------------------------------
// Path simulation
// ---------------------------------------------------------------------------

/// Finite realization parameters: the infinite history is cut at
/// truncation_lag and the first burn_in samples are discarded.
struct PathConfig {
  std::int64_t truncation_lag = 64;
  std::int64_t burn_in = 640;  // keep >= 10 * truncation_lag unless probing transients
  std::int64_t length = 100000;
  std::uint64_t seed = 1;
  int n_paths = 1;
  bool check_stationarity = true;     // refuse specs without a stationary solution
  std::int64_t stationarity_horizon = 2000;  // resolvent horizon for that check

  void validate() const {
    if (truncation_lag < 1) throw std::invalid_argument("PathConfig: truncation_lag must be >= 1");
    if (length < 1) throw std::invalid_argument("PathConfig: length must be >= 1");
    if (burn_in < truncation_lag) throw std::invalid_argument("PathConfig: burn_in must be >= truncation_lag");
    if (n_paths < 1) throw std::invalid_argument("PathConfig: n_paths must be >= 1");
  }
};

/// Simulate X(1..length) of the volatility recursion
///   X(k) = sig(k) xi(k),  sig(k) = a + sum_{j=1}^{M} b(j) X(k-j),
/// with the pre-sample history pinned at the stationary mean to shorten
/// transients. Refuses non-stationary specs unless the check is disabled.
inline std::vector<double> simulate_path(const KernelSpec& kernel, const ShockSpec& shocks, double intercept,
                                         const PathConfig& cfg, int path_index = 0) {
  cfg.validate();
  if (!(intercept > 0.0)) throw std::invalid_argument("simulate_path: intercept must be positive");

  const double lambda1 = shocks.lambda1();
  const Interval truncated = weighted_kernel_sum(kernel, 1.0, cfg.truncation_lag, /*add_tail_bound=*/false);
  if (!(lambda1 * truncated.upper < 1.0))
    throw hypothesis_error("simulate_path: lambda1 * sum_{j<=M} b(j) >= 1, truncated recursion unstable");

  if (cfg.check_stationarity) {
    if (shocks.degenerate())
      throw hypothesis_error("simulate_path: degenerate shocks have no stationary theory (disable the check to force)");
    const MomentSpec moments = shocks.moments(intercept);
    const ResolventSeries rs = compute_resolvent(kernel, lambda1, cfg.stationarity_horizon);
    if (check_s1(kernel, moments, cfg.stationarity_horizon) != Verdict::HOLDS ||
        check_s2(rs, moments) != Verdict::HOLDS)
      throw hypothesis_error("simulate_path: no stationary solution established for this spec");
  }

  const std::int64_t m = cfg.truncation_lag;
  const std::vector<double> b = kernel.materialize(m);
  const double b_full = weighted_kernel_sum(kernel, 1.0, std::max<std::int64_t>(m, 1000)).midpoint();
  const double mean_start = lambda1 * b_full < 1.0 ? intercept * lambda1 / (1.0 - lambda1 * b_full) : intercept;

  Rng rng(cfg.seed, static_cast<std::uint64_t>(path_index));
  const std::int64_t total = cfg.burn_in + cfg.length;
  std::vector<double> x(static_cast<std::size_t>(m + total), mean_start);
  for (std::int64_t k = m; k < m + total; ++k) {
    double sig = intercept;
    for (std::int64_t j = 1; j <= m; ++j) sig += b[static_cast<std::size_t>(j - 1)] * x[static_cast<std::size_t>(k - j)];
    const double value = sig * shocks.sample(rng);
    if (!std::isfinite(value)) throw std::overflow_error("simulate_path: non-finite sample (recursion blew up)");
    x[static_cast<std::size_t>(k)] = value;
  }
  return {x.begin() + static_cast<std::ptrdiff_t>(m + cfg.burn_in), x.end()};
}

// ---------------------------------------------------------------------------
// Empirical autocovariance
// ---------------------------------------------------------------------------

/// Empirical estimates with batch-means standard errors. The biased 1/T
/// normalization keeps the estimated sequence positive semidefinite.
struct SimResult {
  double empirical_mean = 0.0;
  std::vector<double> rho_hat;  // lags 0..max_lag
  std::vector<double> se;
  std::int64_t sample_size = 0;
  int batches = 0;
  PathConfig config;
};

namespace detail {

inline std::vector<double> biased_autocov(std::span<const double> x, std::int64_t max_lag) {
  const auto t = static_cast<std::int64_t>(x.size());
  long double mean_acc = 0.0L;
  for (double v : x) mean_acc += v;
  const double mean = static_cast<double>(mean_acc / static_cast<long double>(t));
  std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 0.0);
  parallel_for(max_lag + 1, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      long double acc = 0.0L;
      for (std::int64_t i = 0; i + k < t; ++i)
        acc += (x[static_cast<std::size_t>(i)] - mean) * (x[static_cast<std::size_t>(i + k)] - mean);
      rho[static_cast<std::size_t>(k)] = static_cast<double>(acc / static_cast<long double>(t));
    }
  });
  return rho;
}

}  // namespace detail

inline SimResult empirical_autocovariance(std::span<const double> x, std::int64_t max_lag, int batches = 32) {
  const auto t = static_cast<std::int64_t>(x.size());
  if (max_lag < 0) throw std::invalid_argument("empirical_autocovariance: max_lag must be >= 0");
  if (t <= max_lag) throw std::domain_error("empirical_autocovariance: need more samples than lags");
  if (batches < 2) throw std::invalid_argument("empirical_autocovariance: need at least 2 batches");
  std::int64_t batch_len = t / batches;
  if (batch_len <= max_lag) {
    batches = std::max<int>(2, static_cast<int>(t / (2 * (max_lag + 1))));
    batch_len = t / batches;
    if (batch_len <= max_lag)
      throw std::domain_error("empirical_autocovariance: series too short for batch-means errors at this lag");
  }

  SimResult out;
  out.sample_size = t;
  out.batches = batches;
  long double mean_acc = 0.0L;
  for (double v : x) mean_acc += v;
  out.empirical_mean = static_cast<double>(mean_acc / static_cast<long double>(t));
  out.rho_hat = detail::biased_autocov(x, max_lag);

  // batch spread around the batch average, lag by lag
  std::vector<std::vector<double>> batch_rho(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b)
    batch_rho[static_cast<std::size_t>(b)] =
        detail::biased_autocov(x.subspan(static_cast<std::size_t>(b) * static_cast<std::size_t>(batch_len),
                                         static_cast<std::size_t>(batch_len)),
                               max_lag);
  out.se.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (std::int64_t k = 0; k <= max_lag; ++k) {
    double m = 0.0;
    for (int b = 0; b < batches; ++b) m += batch_rho[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
    m /= batches;
    double ss = 0.0;
    for (int b = 0; b < batches; ++b) {
      const double d = batch_rho[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)] - m;
      ss += d * d;
    }
    out.se[static_cast<std::size_t>(k)] = std::sqrt(ss / (batches * (batches - 1.0)));
  }
  return out;
}

/// One-call pipeline: simulate cfg.n_paths independent paths and estimate.
/// For a single path the errors come from batch means; for several paths
/// the estimates are averaged and the errors come from the spread across
/// paths, combined in fixed path order.
inline SimResult simulate_and_estimate(const KernelSpec& kernel, const ShockSpec& shocks, double intercept,
                                       const PathConfig& cfg, std::int64_t max_lag) {
  cfg.validate();
  if (cfg.n_paths == 1) {
    const std::vector<double> x = simulate_path(kernel, shocks, intercept, cfg, 0);
    SimResult out = empirical_autocovariance(x, max_lag);
    out.config = cfg;
    return out;
  }

  std::vector<std::vector<double>> rho(static_cast<std::size_t>(cfg.n_paths));
  std::vector<double> means(static_cast<std::size_t>(cfg.n_paths), 0.0);
  parallel_for(cfg.n_paths, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t p = lo; p < hi; ++p) {
      const std::vector<double> x = simulate_path(kernel, shocks, intercept, cfg, static_cast<int>(p));
      rho[static_cast<std::size_t>(p)] = detail::biased_autocov(x, max_lag);
      long double acc = 0.0L;
      for (double v : x) acc += v;
      means[static_cast<std::size_t>(p)] = static_cast<double>(acc / static_cast<long double>(x.size()));
    }
  });

  SimResult out;
  out.config = cfg;
  out.sample_size = cfg.length * cfg.n_paths;
  out.batches = cfg.n_paths;
  out.rho_hat.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  out.se.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (double m : means) out.empirical_mean += m;
  out.empirical_mean /= cfg.n_paths;
  for (std::int64_t k = 0; k <= max_lag; ++k) {
    double m = 0.0;
    for (int p = 0; p < cfg.n_paths; ++p) m += rho[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
    m /= cfg.n_paths;
    out.rho_hat[static_cast<std::size_t>(k)] = m;
    double ss = 0.0;
    for (int p = 0; p < cfg.n_paths; ++p) {
      const double d = rho[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] - m;
      ss += d * d;
    }
    out.se[static_cast<std::size_t>(k)] = std::sqrt(ss / (cfg.n_paths * (cfg.n_paths - 1.0)));
  }
  return out;
}

}  // namespace archinfty
