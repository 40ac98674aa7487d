#pragma once

// BoundReport: one evaluated inequality with its slack and verdict.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

namespace spectral_bounds {

/// Which side of the inequality the computed quantity sits on.
enum class Direction {
  upper,  // computed <= bound
  lower,  // computed >= bound
};

struct BoundReport {
  std::string kind;
  double parameter = 0.0;
  double bound = 0.0;
  double computed = 0.0;
  double slack = 0.0;
  bool holds = false;
  Direction direction = Direction::upper;
  std::string notes;
  std::string digest;
};

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr double kHoldsTolerance = 1e-9;

/// Ratio computed/bound (upper) or bound/computed (lower); 1 when both are 0,
/// +inf when only the denominator is.
inline double slack_ratio(double bound, double computed, Direction d) {
  const double num = d == Direction::upper ? computed : bound;
  const double den = d == Direction::upper ? bound : computed;
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

inline BoundReport make_report(std::string kind, double parameter, double bound, double computed,
                               Direction d, std::string notes = {}) {
  BoundReport r;
  r.kind = std::move(kind);
  r.parameter = parameter;
  r.bound = bound;
  r.computed = computed;
  r.direction = d;
  const double tol = kHoldsTolerance * (1.0 + std::fabs(bound));
  r.holds = d == Direction::upper ? computed <= bound + tol : computed >= bound - tol;
  if (!std::isfinite(bound) || !std::isfinite(computed)) r.holds = false;
  r.slack = slack_ratio(bound, computed, d);
  r.notes = std::move(notes);
  r.digest = fnv1a_hex(r.kind + "|" + format_g17(parameter) + "|" + format_g17(bound) + "|" +
                       format_g17(computed));
  return r;
}

}  // namespace spectral_bounds
