#pragma once

// Spectra and the functionals built on them: counting function, interpolated
// partial sums, Riesz means and their Legendre transform, heat traces with a
// Weyl tail, and exact spectra of rectangles, flat tori and round spheres.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/special_functions.hpp"

namespace spectral_bounds {

/// Sorted eigenvalues. Every eigenvalue strictly below `cutoff` is listed with
/// its multiplicity, and no listed value exceeds `cutoff`.
struct Spectrum {
  std::vector<double> values;
  double cutoff = 0.0;
  std::string source;
  std::vector<double> residuals;  // optional, one per value (solver output)

  Spectrum() = default;
  Spectrum(std::vector<double> v, double c, std::string src = {})
      : values(std::move(v)), cutoff(c), source(std::move(src)) {
    validate();
  }

  /// Spectrum of a finite list that is known completely up to its last value.
  static Spectrum complete(std::vector<double> v, std::string src = {}) {
    std::sort(v.begin(), v.end());
    const double c = v.empty() ? 0.0 : v.back();
    return Spectrum(std::move(v), c, std::move(src));
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  void validate() const {
    if (!std::is_sorted(values.begin(), values.end()))
      throw InvalidInput("spectrum values must be non-decreasing");
    if (!values.empty() && values.back() > cutoff)
      throw InvalidInput("spectrum values exceed the stated cutoff");
  }
};

/// Distinct eigenvalues with multiplicities; complete up to `cutoff`.
struct HomogeneousSpectrum {
  std::vector<std::pair<double, long>> distinct;
  double manifold_volume = 1.0;
  double cutoff = 0.0;

  long count_upto(double r) const {
    long n = 0;
    for (const auto& [lam, m] : distinct)
      if (lam <= r) n += m;
    return n;
  }
};

namespace detail {

// Groups sorted values that agree to `rel_tol` (relative, with an absolute
// floor of rel_tol for values near zero).
inline std::vector<std::pair<double, long>> group_sorted(const std::vector<double>& v,
                                                        double rel_tol = 1e-9) {
  std::vector<std::pair<double, long>> out;
  for (double x : v) {
    if (!out.empty() && std::fabs(x - out.back().first) <= rel_tol * std::max(1.0, std::fabs(x))) {
      ++out.back().second;
    } else {
      out.emplace_back(x, 1);
    }
  }
  return out;
}

}  // namespace detail

/// Periodic Laplacian on ℝ²/Γ: values 4π²|ξ|², ξ ∈ Γ*, up to `cutoff`.
inline HomogeneousSpectrum torus_spectrum(const Lattice2& g, double cutoff) {
  if (!(cutoff >= 0.0)) throw InvalidInput("torus_spectrum: cutoff must be >= 0");
  const Lattice2 d = g.dual();
  const auto gram = d.gram();
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  const double r2 = cutoff / four_pi2;
  // |m e1* + n e2*|² >= λ_min (m² + n²), so |m|, |n| <= sqrt(r2/λ_min).
  const double lmin = detail::smallest_gram_eigenvalue(gram);
  const long bound = static_cast<long>(std::floor(std::sqrt(r2 / lmin))) + 1;
  std::vector<double> vals;
  for (long m = -bound; m <= bound; ++m) {
    for (long n = -bound; n <= bound; ++n) {
      const double q = gram[0] * m * m + 2.0 * gram[1] * m * n + gram[2] * n * n;
      const double lam = four_pi2 * q;
      if (lam <= cutoff * (1.0 + 1e-12)) vals.push_back(lam);
    }
  }
  std::sort(vals.begin(), vals.end());
  HomogeneousSpectrum h;
  h.distinct = detail::group_sorted(vals);
  h.distinct.front().first = 0.0;
  h.manifold_volume = g.covolume();
  h.cutoff = cutoff;
  return h;
}

/// Laplacian on the unit sphere S^ν: l(l+ν−1) with multiplicity C(l+ν,ν) − C(l+ν−2,ν).
inline HomogeneousSpectrum sphere_spectrum(int nu, int l_max) {
  if (nu < 2) throw InvalidInput("sphere_spectrum: dimension must be >= 2");
  if (l_max < 0) throw InvalidInput("sphere_spectrum: l_max must be >= 0");
  auto binom = [](long n, long k) -> long {
    if (n < k || n < 0) return 0;
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  HomogeneousSpectrum h;
  for (long l = 0; l <= l_max; ++l) {
    h.distinct.emplace_back(static_cast<double>(l * (l + nu - 1)),
                            binom(l + nu, nu) - binom(l + nu - 2, nu));
  }
  h.manifold_volume = (nu + 1) * unit_ball_volume(nu + 1);
  h.cutoff = h.distinct.back().first;
  return h;
}

/// λ ↦ λ·w_mean + vw_mean on every distinct value.
inline HomogeneousSpectrum shifted_spectrum(const HomogeneousSpectrum& h, double w_mean,
                                            double vw_mean) {
  if (!(w_mean > 0.0)) throw InvalidInput("shifted_spectrum: w_mean must be positive");
  HomogeneousSpectrum out = h;
  for (auto& [lam, m] : out.distinct) lam = lam * w_mean + vw_mean;
  out.cutoff = h.cutoff * w_mean + vw_mean;
  return out;
}

inline Spectrum flatten(const HomogeneousSpectrum& h, std::string source = "homogeneous") {
  std::vector<double> v;
  for (const auto& [lam, m] : h.distinct) v.insert(v.end(), static_cast<std::size_t>(m), lam);
  return Spectrum(std::move(v), h.cutoff, std::move(source));
}

/// N(R): number of listed eigenvalues <= R. Requires R < cutoff, or R equal to
/// the cutoff when `values.back() < cutoff`.
inline std::size_t counting(const Spectrum& s, double r) {
  if (r > s.cutoff) throw InsufficientSpectrum("counting: R exceeds the spectrum cutoff");
  return static_cast<std::size_t>(std::upper_bound(s.values.begin(), s.values.end(), r) -
                                  s.values.begin());
}

/// Σ_{j<⌊p⌋} a_j + (p − ⌊p⌋) a_{⌊p⌋}.
inline double interp_partial_sum(const Spectrum& s, double p) {
  if (!(p >= 0.0)) throw InvalidInput("interp_partial_sum: p must be >= 0");
  const double fl = std::floor(p);
  const double frac = p - fl;
  const auto n = static_cast<std::size_t>(fl);
  if (n > s.size() || (n == s.size() && frac > 0.0))
    throw InsufficientSpectrum("interp_partial_sum: p = " + std::to_string(p) +
                               " exceeds the " + std::to_string(s.size()) + " available values");
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += s.values[j];
  if (frac > 0.0) sum += frac * s.values[n];
  return sum;
}

/// R_1(z) = Σ_j (z − μ_j)_+, exact for z <= cutoff.
inline double riesz_mean_1(const Spectrum& s, double z) {
  if (z > s.cutoff) throw InsufficientSpectrum("riesz_mean_1: z exceeds the spectrum cutoff");
  double r = 0.0;
  for (double mu : s.values) {
    if (mu >= z) break;
    r += z - mu;
  }
  return r;
}

/// sup_{z >= 0} (pz − R_1(z)), maximised over the breakpoints {0} ∪ {μ_j}.
/// pz − R_1 is concave and piecewise affine, so a breakpoint attains the sup.
inline double legendre_of_riesz(const Spectrum& s, double p) {
  if (!(p >= 0.0)) throw InvalidInput("legendre_of_riesz: p must be >= 0");
  if (std::floor(p) > static_cast<double>(s.size()) ||
      (std::floor(p) == static_cast<double>(s.size()) && p > std::floor(p)))
    throw InsufficientSpectrum("legendre_of_riesz: p exceeds the available values");
  // Running R_1 at successive breakpoints: R_1(μ_m) = Σ_{j<m} (μ_m − μ_j).
  double best = -std::numeric_limits<double>::infinity();
  double prefix = 0.0;  // Σ_{j<m} μ_j
  auto consider = [&](double z, std::size_t below, double below_sum) {
    if (z < 0.0) return;
    const double r1 = static_cast<double>(below) * z - below_sum;
    best = std::max(best, p * z - r1);
  };
  std::size_t m = 0;
  const std::size_t n = s.size();
  // z = 0 with all negative values below it.
  {
    std::size_t below = 0;
    double bs = 0.0;
    while (below < n && s.values[below] < 0.0) bs += s.values[below++];
    consider(0.0, below, bs);
  }
  while (m < n) {
    // First index of this value's cluster: all values < μ_m are below it.
    consider(s.values[m], m, prefix);
    prefix += s.values[m];
    ++m;
  }
  return best;
}

/// Weyl tail N_W(z) = C (z − B)_+^{ν/2}, C = ω_ν|Ω|A^{−ν/2}/(2π)^ν, for the
/// operator with mean weight A = ∮w and shift B = ∮Ṽw.
struct TailModel {
  int nu = 2;
  double volume = 1.0;
  double w_mean = 1.0;
  double shift = 0.0;

  double coefficient() const {
    return unit_ball_volume(nu) * volume * std::pow(w_mean, -0.5 * nu) /
           std::pow(2.0 * std::numbers::pi, nu);
  }
  double counting(double z) const {
    return z <= shift ? 0.0 : coefficient() * std::pow(z - shift, 0.5 * nu);
  }
  /// ∫_Z^∞ e^{−zt} dN_W(z).
  double laplace_tail(double cutoff, double t) const {
    const double a = 0.5 * nu;
    const double x = std::max(cutoff - shift, 0.0) * t;
    return coefficient() * a * std::exp(-shift * t) * std::pow(t, -a) *
           boost::math::tgamma(a, x);
  }
};

struct HeatTrace {
  double truncated = 0.0;  // Σ_{μ_j listed} e^{−μ_j t}
  double tail = 0.0;       // Weyl estimate of the unlisted part (0 without a model)
  double total() const { return truncated + tail; }
};

inline HeatTrace heat_trace(const Spectrum& s, double t, const TailModel* tail = nullptr) {
  if (!(t > 0.0)) throw InvalidInput("heat_trace: t must be positive");
  HeatTrace h;
  // Sum small terms first for a reproducible, accurate result.
  for (std::size_t i = s.size(); i-- > 0;) h.truncated += std::exp(-s.values[i] * t);
  if (tail) h.tail = tail->laplace_tail(s.cutoff, t);
  return h;
}

inline HeatTrace heat_trace(const Spectrum& s, double t, const TailModel& tail) {
  return heat_trace(s, t, &tail);
}

/// Neumann eigenvalues π² Σ m_a²/l_a² of the box Π[0, l_a], all up to `cutoff`.
inline Spectrum box_neumann_upto(const std::vector<double>& lengths, double cutoff) {
  if (lengths.empty()) throw InvalidInput("box_neumann_upto: need at least one side");
  for (double l : lengths)
    if (!(l > 0.0)) throw InvalidInput("box_neumann_upto: side lengths must be positive");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  std::vector<double> vals;
  std::function<void(std::size_t, double)> walk = [&](std::size_t axis, double acc) {
    if (axis == lengths.size()) {
      vals.push_back(acc);
      return;
    }
    const double c = pi2 / (lengths[axis] * lengths[axis]);
    for (long m = 0;; ++m) {
      const double v = acc + c * m * m;
      if (v > cutoff) break;
      walk(axis + 1, v);
    }
  };
  if (cutoff >= 0.0) walk(0, 0.0);
  std::sort(vals.begin(), vals.end());
  return Spectrum(std::move(vals), cutoff, "exact-rectangle");
}

/// First k Neumann eigenvalues of [0,lx]×[0,ly]. The cutoff is the (k+1)-th
/// value, so every eigenvalue strictly below it is listed.
inline Spectrum rectangle_neumann_exact(double lx, double ly, std::size_t k) {
  if (k < 1) throw InvalidInput("rectangle_neumann_exact: k must be >= 1");
  if (!(lx > 0.0 && ly > 0.0)) throw InvalidInput("rectangle_neumann_exact: sides must be positive");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double r = pi2 * std::max(1.0 / (lx * lx), 1.0 / (ly * ly));
  Spectrum all = box_neumann_upto({lx, ly}, r);
  while (all.size() < k + 1) {
    r *= 2.0;
    all = box_neumann_upto({lx, ly}, r);
  }
  const double next = all.values[k];
  std::vector<double> v(all.values.begin(), all.values.begin() + static_cast<long>(k));
  Spectrum s;
  s.values = std::move(v);
  s.cutoff = next;
  s.source = "exact-rectangle";
  return s;
}

/// Laplace-transform identity with truncation at Z = cutoff:
/// t² ∫₀^Z e^{−zt} R_1(z) dz + e^{−Zt}(t R_1(Z) + N(Z⁻)), which equals
/// Σ_{μ_j < Z} e^{−μ_j t} exactly. The integral is done piecewise in closed form.
inline double laplace_of_riesz(const Spectrum& s, double t, double z_max) {
  if (!(t > 0.0)) throw InvalidInput("laplace_of_riesz: t must be positive");
  if (z_max > s.cutoff) throw InsufficientSpectrum("laplace_of_riesz: Z exceeds cutoff");
  // On [a, b] with R_1(z) = n z − S (n values below a), ∫ e^{−zt}(n z − S) dz.
  auto piece = [t](double a, double b, double n, double S) {
    auto F = [&](double z) {  // antiderivative of e^{−zt}(n z − S)
      return -std::exp(-z * t) * ((n * z - S) / t + n / (t * t));
    };
    return F(b) - F(a);
  };
  double integral = 0.0;
  double n = 0.0, S = 0.0;
  double a = 0.0;
  for (double mu : s.values) {
    if (mu >= z_max) break;
    const double lo = std::max(a, 0.0);
    if (mu > lo && n > 0.0) integral += piece(lo, mu, n, S);
    if (mu > a) a = mu;
    n += 1.0;
    S += mu;
  }
  const double lo = std::max(a, 0.0);
  if (z_max > lo && n > 0.0) integral += piece(lo, z_max, n, S);
  const double r1 = n * z_max - S;
  return t * t * integral + std::exp(-z_max * t) * (t * r1 + n);
}

}  // namespace spectral_bounds
