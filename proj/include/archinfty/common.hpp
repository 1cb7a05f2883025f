#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace archinfty {

/// Three-valued verdict for conditions evaluated through bracketing
/// intervals: a truncated sum cannot always separate a statistic from
/// its threshold.
enum class Verdict { HOLDS, FAILS, INDETERMINATE };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::HOLDS: return "HOLDS";
    case Verdict::FAILS: return "FAILS";
    default: return "INDETERMINATE";
  }
}

/// Closed interval [lower, upper] bracketing a real quantity.
/// upper may be +inf when no finite bound is available.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  double midpoint() const {
    if (!std::isfinite(upper)) return lower;
    return 0.5 * (lower + upper);
  }
  bool contains(double x) const { return lower <= x && x <= upper; }
  bool finite() const { return std::isfinite(lower) && std::isfinite(upper); }

  Interval scaled(double c) const { return {c * lower, c * upper}; }
};

/// Verdict on "value < threshold" for a bracketed value.
inline Verdict strictly_below(const Interval& value, double threshold) {
  if (value.upper < threshold) return Verdict::HOLDS;
  if (value.lower >= threshold) return Verdict::FAILS;
  return Verdict::INDETERMINATE;
}

/// Thrown when a theorem hypothesis or stationarity condition fails:
/// the requested quantity is not defined for the given data, which is
/// distinct from a malformed request.
class hypothesis_error : public std::runtime_error {
 public:
  explicit hypothesis_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a lag or index lies beyond the computed horizon.
class horizon_error : public std::out_of_range {
 public:
  explicit horizon_error(const std::string& what) : std::out_of_range(what) {}
};

/// Worker cap for parallel sections: min(hardware, ARCHINFTY_THREADS).
inline unsigned worker_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ARCHINFTY_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return hw;
}

/// Chunked parallel loop over [0, n). Results must be written to
/// disjoint slots so the outcome is independent of scheduling.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
  const std::int64_t workers = static_cast<std::int64_t>(worker_threads());
  if (n <= 0) return;
  if (workers <= 1 || n < 2 * workers) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace archinfty
