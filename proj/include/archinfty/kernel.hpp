#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "archinfty/common.hpp"

namespace archinfty {

// ---------------------------------------------------------------------------
// Kernel families
//
// A memory kernel is a non-negative sequence b(1), b(2), ... indexed from 1;
// index 0 is never evaluated. Internal arrays follow the same convention:
// slot i of a materialized kernel holds b(i+1).
// ---------------------------------------------------------------------------

/// Continuation rule for a tabulated kernel beyond its last stored value.
/// PowerLaw continues v_M * (M/j)^exponent, Geometric continues
/// v_M * ratio^(j-M), both anchored at the last table entry.
struct TableTail {
  enum class Kind { Zero, PowerLaw, Geometric };
  Kind kind = Kind::Zero;
  double exponent = 0.0;  // PowerLaw only
  double ratio = 0.0;     // Geometric only

  static TableTail zero() { return {}; }
  static TableTail power_law(double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("table power-law tail: exponent must be > 0");
    return {Kind::PowerLaw, exponent, 0.0};
  }
  static TableTail geometric(double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("table geometric tail: ratio must be in (0,1)");
    return {Kind::Geometric, 0.0, ratio};
  }
};

namespace detail {

struct PowerLawFamily {
  double scale, exponent;
};
struct GeometricFamily {
  double scale, ratio;
};
struct PeriodicPowerLawFamily {
  std::vector<double> scales;  // scale for index j is scales[(j-1) % p]
  double exponent;
};
struct LogModulatedFamily {
  double scale, exponent, log_exponent;  // scale * j^-exponent * log(j+2)^log_exponent
};
struct TableFamily {
  std::vector<double> values;  // values[i] = b(i+1)
  TableTail tail;
};

inline void require_finite_nonneg(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

}  // namespace detail

/// A parametric or tabulated memory kernel. Immutable after construction;
/// evaluations at distinct indices are independent.
///
/// The all-zero kernel is permitted but flagged (is_zero()) so that trivial
/// identities stay computable even though the statistical theory excludes it.
class KernelSpec {
 public:
  static KernelSpec power_law(double scale, double exponent) {
    detail::require_finite_nonneg(scale, "power-law scale");
    if (!(exponent > 1.0)) throw std::invalid_argument("power-law exponent must be > 1");
    return KernelSpec(detail::PowerLawFamily{scale, exponent});
  }

  static KernelSpec geometric(double scale, double ratio) {
    detail::require_finite_nonneg(scale, "geometric scale");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("geometric ratio must be in (0,1)");
    return KernelSpec(detail::GeometricFamily{scale, ratio});
  }

  static KernelSpec periodic_power_law(std::vector<double> scales, double exponent) {
    if (scales.size() < 2) throw std::invalid_argument("periodic power law needs period >= 2");
    for (double s : scales) detail::require_finite_nonneg(s, "periodic scale");
    if (!(exponent > 1.0)) throw std::invalid_argument("periodic power-law exponent must be > 1");
    return KernelSpec(detail::PeriodicPowerLawFamily{std::move(scales), exponent});
  }

  static KernelSpec log_modulated_power_law(double scale, double exponent, double log_exponent) {
    detail::require_finite_nonneg(scale, "log-modulated scale");
    if (!(exponent > 1.0)) throw std::invalid_argument("log-modulated exponent must be > 1");
    if (!std::isfinite(log_exponent)) throw std::invalid_argument("log exponent must be finite");
    return KernelSpec(detail::LogModulatedFamily{scale, exponent, log_exponent});
  }

  static KernelSpec table(std::vector<double> values, TableTail tail = TableTail::zero()) {
    for (double v : values) detail::require_finite_nonneg(v, "table value");
    if (values.empty() && tail.kind != TableTail::Kind::Zero)
      throw std::invalid_argument("non-zero table tail needs at least one value to anchor");
    return KernelSpec(detail::TableFamily{std::move(values), tail});
  }

  /// b == 0: the degenerate constant-volatility kernel.
  static KernelSpec zero() { return table({}); }

  /// Kernel value b(j), j >= 1. Total and non-negative.
  double operator()(std::int64_t j) const {
    if (j < 1) throw std::invalid_argument("kernel index must be >= 1");
    return std::visit([j](const auto& fam) { return eval(fam, j); }, family_);
  }

  /// Materialize b(1..n) into a contiguous array (slot i holds b(i+1)).
  std::vector<double> materialize(std::int64_t n) const {
    std::vector<double> b(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    for (std::int64_t j = 1; j <= n; ++j) b[static_cast<std::size_t>(j - 1)] = (*this)(j);
    return b;
  }

  bool is_zero() const {
    return std::visit(
        [](const auto& fam) {
          using T = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<T, detail::PeriodicPowerLawFamily>) {
            for (double s : fam.scales)
              if (s > 0.0) return false;
            return true;
          } else if constexpr (std::is_same_v<T, detail::TableFamily>) {
            for (double v : fam.values)
              if (v > 0.0) return false;
            return true;  // tail anchors on the last value, so it is zero too
          } else {
            return fam.scale == 0.0;
          }
        },
        family_);
  }

  /// Declared period of the decay pattern (1 for aperiodic families).
  std::int64_t period() const {
    if (const auto* p = std::get_if<detail::PeriodicPowerLawFamily>(&family_))
      return static_cast<std::int64_t>(p->scales.size());
    return 1;
  }

  /// The kernel j -> b(j)^2, within the same family system. Used for
  /// sum-of-squares brackets.
  KernelSpec squared() const {
    return std::visit(
        [](const auto& fam) -> KernelSpec {
          using T = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<T, detail::PowerLawFamily>) {
            return KernelSpec(detail::PowerLawFamily{fam.scale * fam.scale, 2.0 * fam.exponent});
          } else if constexpr (std::is_same_v<T, detail::GeometricFamily>) {
            return KernelSpec(detail::GeometricFamily{fam.scale * fam.scale, fam.ratio * fam.ratio});
          } else if constexpr (std::is_same_v<T, detail::PeriodicPowerLawFamily>) {
            std::vector<double> sq(fam.scales.size());
            for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = fam.scales[i] * fam.scales[i];
            return KernelSpec(detail::PeriodicPowerLawFamily{std::move(sq), 2.0 * fam.exponent});
          } else if constexpr (std::is_same_v<T, detail::LogModulatedFamily>) {
            return KernelSpec(detail::LogModulatedFamily{fam.scale * fam.scale, 2.0 * fam.exponent,
                                                         2.0 * fam.log_exponent});
          } else {
            std::vector<double> sq(fam.values.size());
            for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = fam.values[i] * fam.values[i];
            TableTail t = fam.tail;
            if (t.kind == TableTail::Kind::PowerLaw) t.exponent *= 2.0;
            if (t.kind == TableTail::Kind::Geometric) t.ratio *= t.ratio;
            return KernelSpec(detail::TableFamily{std::move(sq), t});
          }
        },
        family_);
  }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&family_);
  }

  const std::variant<detail::PowerLawFamily, detail::GeometricFamily, detail::PeriodicPowerLawFamily,
                     detail::LogModulatedFamily, detail::TableFamily>&
  family() const {
    return family_;
  }

 private:
  template <class F>
  explicit KernelSpec(F fam) : family_(std::move(fam)) {}

  static double eval(const detail::PowerLawFamily& f, std::int64_t j) {
    return f.scale * std::pow(static_cast<double>(j), -f.exponent);
  }
  static double eval(const detail::GeometricFamily& f, std::int64_t j) {
    return f.scale * std::pow(f.ratio, static_cast<double>(j));
  }
  static double eval(const detail::PeriodicPowerLawFamily& f, std::int64_t j) {
    const auto p = static_cast<std::int64_t>(f.scales.size());
    return f.scales[static_cast<std::size_t>((j - 1) % p)] * std::pow(static_cast<double>(j), -f.exponent);
  }
  static double eval(const detail::LogModulatedFamily& f, std::int64_t j) {
    return f.scale * std::pow(static_cast<double>(j), -f.exponent) *
           std::pow(std::log(static_cast<double>(j) + 2.0), f.log_exponent);
  }
  static double eval(const detail::TableFamily& f, std::int64_t j) {
    const auto m = static_cast<std::int64_t>(f.values.size());
    if (j <= m) return f.values[static_cast<std::size_t>(j - 1)];
    if (m == 0) return 0.0;
    const double anchor = f.values.back();
    switch (f.tail.kind) {
      case TableTail::Kind::Zero: return 0.0;
      case TableTail::Kind::PowerLaw:
        return anchor * std::pow(static_cast<double>(m) / static_cast<double>(j), f.tail.exponent);
      case TableTail::Kind::Geometric: return anchor * std::pow(f.tail.ratio, static_cast<double>(j - m));
    }
    return 0.0;
  }

  std::variant<detail::PowerLawFamily, detail::GeometricFamily, detail::PeriodicPowerLawFamily,
               detail::LogModulatedFamily, detail::TableFamily>
      family_;
};

// ---------------------------------------------------------------------------
// Weighted sums with bracketing tails
// ---------------------------------------------------------------------------

namespace detail {

// Upper bound on sum_{j > n} b(j) * w^j. Returns +inf when no finite
// analytic bound is available (divergent or unbounded-weight cases).
inline double tail_bound(const KernelSpec& spec, double w, std::int64_t n) {
  if (spec.is_zero() || w == 0.0) return 0.0;

  if (const auto* f = spec.get_if<PowerLawFamily>()) {
    if (w > 1.0) return kInf;
    if (w == 1.0)
      return f->scale * std::pow(static_cast<double>(n), 1.0 - f->exponent) / (f->exponent - 1.0);
    // decreasing terms: geometric domination at ratio w
    return f->scale * std::pow(static_cast<double>(n + 1), -f->exponent) * std::pow(w, static_cast<double>(n + 1)) /
           (1.0 - w);
  }

  if (const auto* f = spec.get_if<GeometricFamily>()) {
    const double rho = f->ratio * w;
    if (rho >= 1.0) return kInf;
    return f->scale * std::pow(rho, static_cast<double>(n + 1)) / (1.0 - rho);
  }

  if (const auto* f = spec.get_if<PeriodicPowerLawFamily>()) {
    if (w > 1.0) return kInf;
    const double amax = *std::max_element(f->scales.begin(), f->scales.end());
    if (w == 1.0)
      return amax * std::pow(static_cast<double>(n), 1.0 - f->exponent) / (f->exponent - 1.0);
    // per-residue-class geometric domination at ratio w^p
    const auto p = static_cast<std::int64_t>(f->scales.size());
    double first_block = 0.0;
    for (std::int64_t j = n + 1; j <= n + p; ++j) first_block += spec(j) * std::pow(w, static_cast<double>(j));
    return first_block / (1.0 - std::pow(w, static_cast<double>(p)));
  }

  if (const auto* f = spec.get_if<LogModulatedFamily>()) {
    if (w > 1.0) return kInf;
    const double a = f->exponent, d = f->log_exponent;
    const double nd = static_cast<double>(n);
    if (w == 1.0) {
      if (d <= 0.0) return f->scale * std::pow(std::log(nd + 2.0), d) * std::pow(nd, 1.0 - a) / (a - 1.0);
      // majorize log(x+2)^d <= A x^eps on [n, inf): the majorant peaks no
      // later than x_hat = exp(d/eps)
      const double eps = 0.5 * (a - 1.0);
      const double x_hat = std::exp(d / eps);
      const double A = std::pow(std::log(std::max(nd, x_hat) + 2.0), d) * std::pow(nd, -eps);
      return f->scale * A * std::pow(nd, 1.0 - a + eps) / (a - 1.0 - eps);
    }
    const double theta = w * std::exp(std::max(d, 0.0) / ((nd + 2.0) * std::log(nd + 2.0)));
    if (theta >= 1.0) return kInf;
    return spec(n + 1) * std::pow(w, static_cast<double>(n + 1)) / (1.0 - theta);
  }

  const auto* f = spec.get_if<TableFamily>();
  const auto m = static_cast<std::int64_t>(f->values.size());
  double bound = 0.0;
  // stored values not yet covered by the partial sum
  for (std::int64_t j = n + 1; j <= m; ++j)
    bound += f->values[static_cast<std::size_t>(j - 1)] * std::pow(w, static_cast<double>(j));
  const std::int64_t start = std::max(n, m);
  const double anchor = m > 0 ? f->values.back() : 0.0;
  if (anchor == 0.0) return bound;
  switch (f->tail.kind) {
    case TableTail::Kind::Zero: break;
    case TableTail::Kind::Geometric: {
      const double rho = f->tail.ratio * w;
      if (rho >= 1.0) return kInf;
      const double first =
          anchor * std::pow(f->tail.ratio, static_cast<double>(start + 1 - m)) * std::pow(w, static_cast<double>(start + 1));
      bound += first / (1.0 - rho);
      break;
    }
    case TableTail::Kind::PowerLaw: {
      if (w > 1.0) return kInf;
      const double e = f->tail.exponent;
      const double c = anchor * std::pow(static_cast<double>(m), e);
      if (w == 1.0) {
        if (e <= 1.0) return kInf;
        bound += c * std::pow(static_cast<double>(start), 1.0 - e) / (e - 1.0);
      } else {
        bound += c * std::pow(static_cast<double>(start + 1), -e) * std::pow(w, static_cast<double>(start + 1)) /
                 (1.0 - w);
      }
      break;
    }
  }
  return bound;
}

}  // namespace detail

/// Bracket for sum_{j>=1} b(j) * weight^j.
///
/// lower is the partial sum over j = 1..n_terms; upper adds an analytic
/// bound on the remaining tail (exact for geometric tails, integral or
/// domination bounds otherwise). A divergent sum is signalled by
/// upper = +inf, never by an exception. With add_tail_bound = false the
/// result collapses to the bare partial sum [lower, lower].
inline Interval weighted_kernel_sum(const KernelSpec& spec, double weight, std::int64_t n_terms,
                                    bool add_tail_bound = true) {
  if (n_terms < 1) throw std::invalid_argument("weighted_kernel_sum: n_terms must be >= 1");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("weighted_kernel_sum: weight must be finite and >= 0");
  long double partial = 0.0L;
  if (weight == 1.0) {
    for (std::int64_t j = n_terms; j >= 1; --j) partial += spec(j);
  } else {
    const double lw = std::log(weight);
    for (std::int64_t j = n_terms; j >= 1; --j) partial += spec(j) * std::exp(static_cast<double>(j) * lw);
  }
  const double lower = static_cast<double>(partial);
  if (!add_tail_bound) return {lower, lower};
  const double bound = detail::tail_bound(spec, weight, n_terms);
  if (bound == 0.0) return {lower, lower};
  // round the upper endpoint outward so the bracket survives the final
  // floating-point additions
  return {lower, (lower + bound) * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())};
}

/// Bracket for sum_{j>=1} b(j)^2, with the same tail-bound policy.
inline Interval squared_kernel_sum(const KernelSpec& spec, std::int64_t n_terms, bool add_tail_bound = true) {
  return weighted_kernel_sum(spec.squared(), 1.0, n_terms, add_tail_bound);
}

// ---------------------------------------------------------------------------
// High-precision residue-class power series
// ---------------------------------------------------------------------------

/// sum_{n=0}^inf (period*n + first)^(-exponent), exponent > 1.
///
/// Direct partial summation plus an Euler-Maclaurin tail. The correction
/// terms leave the result accurate to near machine precision, which the
/// periodic closed-form constants rely on.
inline double residue_class_power_sum(std::int64_t period, std::int64_t first, double exponent) {
  if (period < 1 || first < 1) throw std::invalid_argument("residue_class_power_sum: period and first must be >= 1");
  if (!(exponent > 1.0)) throw std::invalid_argument("residue_class_power_sum: exponent must be > 1");
  const std::int64_t n_direct = 20000;
  const double p = static_cast<double>(period), a = exponent;
  long double partial = 0.0L;
  for (std::int64_t n = n_direct - 1; n >= 0; --n)
    partial += std::pow(p * static_cast<double>(n) + static_cast<double>(first), -a);
  const double x = p * static_cast<double>(n_direct) + static_cast<double>(first);
  const double f0 = std::pow(x, -a);
  const double integral = std::pow(x, 1.0 - a) / (p * (a - 1.0));
  const double d1 = -a * p * std::pow(x, -a - 1.0);
  const double d3 = -a * (a + 1.0) * (a + 2.0) * p * p * p * std::pow(x, -a - 3.0);
  const double tail = integral + 0.5 * f0 - d1 / 12.0 + d3 / 720.0;
  return static_cast<double>(partial) + tail;
}

// ---------------------------------------------------------------------------
// Finite-horizon weight-class diagnostic
// ---------------------------------------------------------------------------

enum class WrVerdict { CONSISTENT, INCONSISTENT };

inline const char* to_string(WrVerdict v) { return v == WrVerdict::CONSISTENT ? "CONSISTENT" : "INCONSISTENT"; }

struct WrOptions {
  double ratio_tol = 0.05;       // tolerated relative deviation of the ratio from 1/r
  double cauchy_fraction = 0.02; // tolerated trailing-half share of the weighted sum
};

/// Finite-horizon evidence about membership of a positive sequence in the
/// weight class with ratio parameter r. The verdict is a heuristic: the
/// defining conditions are asymptotic and cannot be decided from finitely
/// many terms, so CONSISTENT never claims proof.
struct WrReport {
  double r = 1.0;
  std::int64_t horizon = 0;
  double ratio_median = 0.0;       // median of seq(n-1)/seq(n) over the trailing window
  double ratio_deviation = 0.0;    // |r * ratio_median - 1|
  bool ratios_ok = false;
  double weighted_sum = 0.0;            // sum_{i<=N} seq(i) r^-i
  double weighted_tail_fraction = 0.0;  // share contributed by the trailing half
  bool summable_ok = false;
  std::vector<std::int64_t> m_grid;
  std::vector<double> convolution_stat;  // max_n (1/seq(n)) sum_{i=m}^{n-m} seq(n-i) seq(i)
  bool convolution_ok = false;
  WrVerdict verdict = WrVerdict::INCONSISTENT;
};

inline WrReport wr_diagnostic(const std::function<double(std::int64_t)>& seq, double r, std::int64_t horizon,
                              std::vector<std::int64_t> m_grid, const WrOptions& opts = {}) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("wr_diagnostic: r must be in (0,1]");
  if (m_grid.empty()) throw std::invalid_argument("wr_diagnostic: m_grid must be non-empty");
  std::sort(m_grid.begin(), m_grid.end());
  if (m_grid.front() < 1) throw std::invalid_argument("wr_diagnostic: m_grid entries must be >= 1");
  if (horizon <= 2 * m_grid.back())
    throw std::invalid_argument("wr_diagnostic: horizon must exceed twice the largest m");

  std::vector<double> v(static_cast<std::size_t>(horizon) + 1, 0.0);
  for (std::int64_t n = 1; n <= horizon; ++n) {
    v[static_cast<std::size_t>(n)] = seq(n);
    if (!(v[static_cast<std::size_t>(n)] > 0.0))
      throw std::domain_error("wr_diagnostic: sequence must be strictly positive on the horizon");
  }

  WrReport rep;
  rep.r = r;
  rep.horizon = horizon;
  rep.m_grid = m_grid;

  const std::int64_t win_lo = std::max<std::int64_t>(2, horizon - horizon / 5);
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(horizon - win_lo + 1));
  for (std::int64_t n = win_lo; n <= horizon; ++n)
    ratios.push_back(v[static_cast<std::size_t>(n - 1)] / v[static_cast<std::size_t>(n)]);
  std::nth_element(ratios.begin(), ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
  rep.ratio_median = ratios[ratios.size() / 2];
  rep.ratio_deviation = std::abs(r * rep.ratio_median - 1.0);
  rep.ratios_ok = rep.ratio_deviation <= opts.ratio_tol;

  long double wsum = 0.0L, whead = 0.0L;
  const std::int64_t half = horizon / 2;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double term = v[static_cast<std::size_t>(i)] * std::pow(r, -static_cast<double>(i));
    wsum += term;
    if (i <= half) whead += term;
  }
  rep.weighted_sum = static_cast<double>(wsum);
  if (!std::isfinite(rep.weighted_sum)) {
    rep.weighted_tail_fraction = 1.0;
    rep.summable_ok = false;
  } else {
    rep.weighted_tail_fraction = static_cast<double>((wsum - whead) / wsum);
    rep.summable_ok = rep.weighted_tail_fraction <= opts.cauchy_fraction;
  }

  rep.convolution_stat.reserve(m_grid.size());
  for (std::int64_t m : m_grid) {
    double worst = 0.0;
    for (std::int64_t n = 2 * m; n <= horizon; ++n) {
      long double conv = 0.0L;
      for (std::int64_t i = m; i <= n - m; ++i)
        conv += v[static_cast<std::size_t>(n - i)] * v[static_cast<std::size_t>(i)];
      worst = std::max(worst, static_cast<double>(conv) / v[static_cast<std::size_t>(n)]);
    }
    rep.convolution_stat.push_back(worst);
  }
  rep.convolution_ok = true;
  for (std::size_t k = 1; k < rep.convolution_stat.size(); ++k)
    if (rep.convolution_stat[k] > rep.convolution_stat[k - 1] * (1.0 + 1e-9)) rep.convolution_ok = false;

  rep.verdict = (rep.ratios_ok && rep.summable_ok && rep.convolution_ok) ? WrVerdict::CONSISTENT
                                                                         : WrVerdict::INCONSISTENT;
  return rep;
}

}  // namespace archinfty
