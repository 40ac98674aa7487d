#pragma once

// Comparisons between the spectrum of Ω ⊂ M and the shifted Laplace spectrum
// λ̃_j = λ_j ∮w + ∮Ṽw of a compact homogeneous space M, and the lattice
// theta lower bound for periodic problems.

#include <cmath>
#include <string>

#include "spectral_bounds/bounds.hpp"
#include "spectral_bounds/error.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/report.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

namespace detail {

inline void check_ratio(double vol_ratio, const char* who) {
  if (!(vol_ratio > 0.0 && vol_ratio <= 1.0 + 1e-12))
    throw InvalidInput(std::string(who) + ": volume ratio |Omega|/|M| must lie in (0, 1]");
}

inline double riesz_mean_homogeneous(const HomogeneousSpectrum& h, double z) {
  if (z > h.cutoff) throw InsufficientSpectrum("homogeneous Riesz mean: z exceeds the spectrum cutoff");
  double r = 0.0;
  for (const auto& [lam, m] : h.distinct)
    if (lam < z) r += static_cast<double>(m) * (z - lam);
  return r;
}

}  // namespace detail

/// Σ(z − μ_j)_+ >= (|Ω|/|M|) Σ(z − λ̃_j)_+.
inline BoundReport homog_riesz_compare(const Spectrum& mu, const HomogeneousSpectrum& shifted,
                                       double vol_ratio, double z) {
  detail::check_ratio(vol_ratio, "homog_riesz_compare");
  const double rhs = vol_ratio * detail::riesz_mean_homogeneous(shifted, z);
  return make_report("homog_riesz", z, rhs, riesz_mean_1(mu, z), Direction::lower);
}

/// 𝔖_μ(p) <= (|Ω|/|M|) 𝔖_λ̃((|M|/|Ω|) p). For Ω = M this is Σ_{j<k} μ_j <= Σ_{j<k} λ̃_j.
inline BoundReport homog_sum_compare(const Spectrum& mu, const HomogeneousSpectrum& shifted,
                                     double vol_ratio, double p) {
  detail::check_ratio(vol_ratio, "homog_sum_compare");
  if (!(p > 0.0)) throw InvalidInput("homog_sum_compare: p must be positive");
  const Spectrum lam = flatten(shifted);
  const double rhs = vol_ratio * interp_partial_sum(lam, p / vol_ratio);
  return make_report("homog_sum", p, rhs, interp_partial_sum(mu, p), Direction::upper);
}

/// Σe^{−μ_j t} >= (|Ω|/|M|) Σe^{−λ̃_j t}. The left side is the truncated sum;
/// the right side adds the Weyl tail of λ̃ when a model is given, so a pass is
/// conservative in both truncations.
inline BoundReport heat_homog_compare(const Spectrum& mu, const HomogeneousSpectrum& shifted,
                                      double vol_ratio, double t, const TailModel* rhs_tail = nullptr) {
  detail::check_ratio(vol_ratio, "heat_homog_compare");
  if (!(t > 0.0)) throw InvalidInput("heat_homog_compare: t must be positive");
  const HeatTrace lhs = heat_trace(mu, t);
  const HeatTrace rhs = heat_trace(flatten(shifted), t, rhs_tail);
  return make_report("heat_homog", t, vol_ratio * rhs.total(), lhs.truncated, Direction::lower,
                     "rhs_tail=" + format_g17(vol_ratio * rhs.tail));
}

/// Periodic problem on ℝ²/Γ with fundamental domain Ω:
/// Σe^{−μ_j t} >= Θ((∮w/|Ω|) t) e^{−t∮Ṽw}, with Θ normalised to the
/// unit-covolume hexagonal lattice. The truncated sum decides the verdict.
inline BoundReport heat_torus_bound(const BoundInputs& in, const Spectrum& mu, double t) {
  if (in.nu != 2) throw InvalidInput("heat_torus_bound: requires a two-dimensional torus");
  if (!(t > 0.0)) throw InvalidInput("heat_torus_bound: t must be positive");
  in.validate();
  const double s = in.w_mean / in.volume * t;
  const double rhs = hex_theta_unit_covolume(s) * std::exp(-t * in.vw_mean);
  const TailModel tm{2, in.volume, in.w_mean, in.vw_mean};
  const HeatTrace h = heat_trace(mu, t, tm);
  return make_report("heat_torus", t, rhs, h.truncated, Direction::lower,
                     "theta normalised to unit covolume; weyl_tail=" + format_g17(h.tail));
}

}  // namespace spectral_bounds
