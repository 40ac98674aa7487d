#pragma once

// Gamma-based ball volumes and Bessel functions of the first kind with their
// first positive zero. Everything here is self-contained; no special-function
// library is required.

#include <cmath>
#include <numbers>

#include "spectral_bounds/error.hpp"

namespace spectral_bounds {

/// Volume ω_ν of the unit ball in ℝ^ν.
inline double unit_ball_volume(int nu) {
  if (nu < 1) throw InvalidInput("unit_ball_volume: dimension must be >= 1");
  const double half = 0.5 * nu;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

namespace detail {

// Ascending series. Accurate for moderate x; the caller keeps x <= 12 or x < p.
inline double bessel_j_series(double p, double x) {
  const long double half = 0.5L * x;
  long double term =
      std::exp(static_cast<long double>(p) * std::log(half) - std::lgamma(static_cast<long double>(p) + 1.0L));
  long double sum = term;
  const long double q = half * half;
  for (int k = 0; k < 500; ++k) {
    term *= -q / ((k + 1.0L) * (k + 1.0L + p));
    sum += term;
    if (std::fabs(term) < 1e-19L * std::fabs(sum) && k > half) break;
  }
  return static_cast<double>(sum);
}

// Hankel asymptotic expansion; used for x > 12 with small order.
inline double bessel_j_asymptotic(double p, double x) {
  const double mu = 4.0 * p * p;
  double pc = 0.0, qc = 0.0;
  double a = 1.0;  // a_k(p) / x^k with alternating signs folded in below
  double prev = INFINITY;
  for (int k = 0; k < 60; ++k) {
    const double mag = std::fabs(a);
    if (mag > prev) break;  // asymptotic series started diverging
    prev = mag;
    switch (k % 4) {
      case 0: pc += a; break;
      case 1: qc += a; break;
      case 2: pc -= a; break;
      case 3: qc -= a; break;
    }
    if (mag < 1e-17 * (std::fabs(pc) + std::fabs(qc))) break;
    const double odd = 2.0 * k + 1.0;
    a *= (mu - odd * odd) / ((k + 1.0) * 8.0 * x);
  }
  const double chi = x - (0.5 * p + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (pc * std::cos(chi) - qc * std::sin(chi));
}

}  // namespace detail

/// Bessel function J_p(x) for p > −1, x >= 0 (x > 0 when p < 0).
inline double bessel_j(double p, double x) {
  if (!(p > -1.0) || x < 0.0) throw InvalidInput("bessel_j: requires p > -1 and x >= 0");
  if (x == 0.0) {
    if (p < 0.0) throw InvalidInput("bessel_j: J_p(0) is unbounded for p < 0");
    return p == 0.0 ? 1.0 : 0.0;
  }
  if (x <= 12.0 || x < p) return detail::bessel_j_series(p, x);
  if (p < 0.0) return detail::bessel_j_asymptotic(p, x);
  // Forward recurrence in the order from p0 = frac(p); stable while order < x.
  const double base = p - std::floor(p);
  const int steps = static_cast<int>(std::floor(p));
  double jm = detail::bessel_j_asymptotic(base, x);
  if (steps == 0) return jm;
  double j = detail::bessel_j_asymptotic(base + 1.0, x);
  for (int n = 1; n < steps; ++n) {
    const double order = base + n;
    const double next = 2.0 * order / x * j - jm;
    jm = j;
    j = next;
  }
  return j;
}

/// Smallest positive zero j_{p,1} of J_p, for p in [−1/2, 50].
inline double bessel_first_zero(double p) {
  if (!(p >= -0.5 && p <= 50.0))
    throw InvalidInput("bessel_first_zero: order must lie in [-1/2, 50]");
  const double lo = std::max(p, 1.0);
  const double hi = std::max(p + 3.0 * std::cbrt(p) + 3.0, lo + 3.0);
  // The bracket can hold more than one zero for small p, so walk it in steps
  // shorter than the zero spacing (> 2.4) and stop at the first sign change.
  const double step = 0.1;
  double a = lo;
  double fa = bessel_j(p, a);
  double b = a;
  double fb = fa;
  bool found = false;
  while (b < hi + 1.0) {
    b = a + step;
    fb = bessel_j(p, b);
    if ((fa > 0.0) != (fb > 0.0)) {
      found = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!found) throw Error("bessel_first_zero: no sign change in bracket");
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = bessel_j(p, m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace spectral_bounds
