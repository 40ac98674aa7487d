#pragma once

// Averaged-variational bounds on eigenvalue sums, Riesz means, heat traces
// and individual eigenvalues, each checked against a computed spectrum.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/problem.hpp"
#include "spectral_bounds/report.hpp"
#include "spectral_bounds/special_functions.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

/// H_Ω for a Euclidean domain: (2π)^ν/ω_ν.
inline double euclidean_H(int nu) {
  return std::pow(2.0 * std::numbers::pi, nu) / unit_ball_volume(nu);
}

/// The scalar data every bound depends on.
struct BoundInputs {
  int nu = 2;
  double volume = 1.0;  // |Ω|
  double w_mean = 1.0;  // ∮ w
  double vw_mean = 0.0; // ∮ Ṽ w
  double H = 0.0;       // H_Ω

  static BoundInputs from(const ProblemSpec& p, const FieldMeans& m, double H = 0.0) {
    BoundInputs in;
    in.nu = p.nu;
    in.volume = m.volume;
    in.w_mean = m.w;
    in.vw_mean = m.vw;
    in.H = H > 0.0 ? H : euclidean_H(p.nu);
    return in;
  }
  static BoundInputs from(const ProblemSpec& p, double H = 0.0) { return from(p, field_means(p), H); }

  void validate() const {
    if (nu < 1) throw InvalidInput("bound inputs: dimension must be >= 1");
    if (!(volume > 0.0)) throw InvalidInput("bound inputs: volume must be positive");
    if (!(w_mean > 0.0)) throw InvalidInput("bound inputs: mean weight must be positive");
    if (!(H > 0.0)) throw InvalidInput("bound inputs: H_Omega must be positive");
  }

  /// (H_Ω k/|Ω|)^{2/ν} ∮w, the Weyl-scale quantity shared by the sum bounds.
  double weyl_scale(double k) const { return std::pow(H * k / volume, 2.0 / nu) * w_mean; }
};

namespace detail {

inline double partial_sum(const Spectrum& s, std::size_t k, const char* who) {
  if (k < 1) throw InvalidInput(std::string(who) + ": k must be >= 1");
  if (s.size() < k)
    throw InsufficientSpectrum(std::string(who) + ": spectrum has " + std::to_string(s.size()) +
                               " values, need " + std::to_string(k));
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) sum += s.values[j];
  return sum;
}

}  // namespace detail

/// Right side of the Euclidean averaged bound,
/// (4π²ν/(ν+2)) (k/(|Ω|ω_ν))^{2/ν} ∮w + ∮Ṽw.
inline double kroger_average_rhs(const BoundInputs& in, double k) {
  const int nu = in.nu;
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  return four_pi2 * nu / (nu + 2.0) * std::pow(k / (in.volume * unit_ball_volume(nu)), 2.0 / nu) *
             in.w_mean +
         in.vw_mean;
}

/// Right side of the general averaged bound, (ν/(ν+2))(H_Ω k/|Ω|)^{2/ν}∮w + ∮Ṽw.
inline double general_average_rhs(const BoundInputs& in, double k) {
  return in.nu / (in.nu + 2.0) * in.weyl_scale(k) + in.vw_mean;
}

/// Σ_{j<k} μ_j <= k × Euclidean averaged bound.
inline BoundReport kroger_avg_bound(const BoundInputs& in, const Spectrum& s, std::size_t k) {
  in.validate();
  const double sum = detail::partial_sum(s, k, "kroger_avg_bound");
  return make_report("kroger_avg", static_cast<double>(k), k * kroger_average_rhs(in, k), sum,
                     Direction::upper);
}

/// Σ_{j<k} μ_j <= k × general averaged bound with the given H_Ω.
inline BoundReport general_sum_bound(const BoundInputs& in, const Spectrum& s, std::size_t k) {
  in.validate();
  const double sum = detail::partial_sum(s, k, "general_sum_bound");
  return make_report("general_sum", static_cast<double>(k), k * general_average_rhs(in, k), sum,
                     Direction::upper);
}

/// Coefficients of the Riesz lower bound A (z − B)_+^{1+ν/2}.
inline std::pair<double, double> riesz_bound_coefficients(const BoundInputs& in) {
  const int nu = in.nu;
  const double A = 2.0 * in.volume / ((nu + 2.0) * in.H) * std::pow(in.w_mean, -0.5 * nu);
  return {A, in.vw_mean};
}

inline double riesz_bound_value(const BoundInputs& in, double z) {
  const auto [A, B] = riesz_bound_coefficients(in);
  return z <= B ? 0.0 : A * std::pow(z - B, 1.0 + 0.5 * in.nu);
}

/// R_1(z) >= (2|Ω|/((ν+2)H_Ω)) (∮w)^{−ν/2} (z − ∮Ṽw)_+^{1+ν/2}.
inline BoundReport riesz_lower_bound(const BoundInputs& in, const Spectrum& s, double z) {
  in.validate();
  return make_report("riesz_lower", z, riesz_bound_value(in, z), riesz_mean_1(s, z), Direction::lower);
}

/// sup_{z>=0}(pz − A(z−B)_+^{1+ν/2}) in closed form.
inline double legendre_conjugate_power(double A, double B, int nu, double p) {
  if (!(A > 0.0)) throw InvalidInput("legendre_conjugate_power: A must be positive");
  if (nu < 1) throw InvalidInput("legendre_conjugate_power: dimension must be >= 1");
  if (!(p >= 0.0)) throw InvalidInput("legendre_conjugate_power: p must be >= 0");
  const double e = 2.0 / nu;
  return std::pow(2.0 / A, e) * nu / std::pow(nu + 2.0, 1.0 + e) * std::pow(p, 1.0 + e) + B * p;
}

/// (π/t)^{ν/2} |Ω|/(ω_ν H_Ω) (∮w)^{−ν/2}.
inline double heat_bound_value(const BoundInputs& in, double t) {
  const int nu = in.nu;
  return std::pow(std::numbers::pi / t, 0.5 * nu) * in.volume / (unit_ball_volume(nu) * in.H) *
         std::pow(in.w_mean, -0.5 * nu);
}

/// Σ e^{−t(μ_j − ∮Ṽw)} >= heat_bound_value. The verdict uses the truncated
/// sum only; the Weyl tail is reported in the notes.
inline BoundReport heat_lower_bound(const BoundInputs& in, const Spectrum& s, double t) {
  in.validate();
  if (!(t > 0.0)) throw InvalidInput("heat_lower_bound: t must be positive");
  TailModel tm{in.nu, in.volume, in.w_mean, in.vw_mean};
  const HeatTrace h = heat_trace(s, t, tm);
  const double shift = std::exp(t * in.vw_mean);
  return make_report("heat_lower", t, heat_bound_value(in, t), h.truncated * shift, Direction::lower,
                     "weyl_tail=" + format_g17(h.tail * shift));
}

/// S_k = ((1/k)Σ_{j<k} μ̃_j) / ((ν/(ν+2)) (H_Ω k/|Ω|)^{2/ν} ∮w), μ̃ = μ − ∮Ṽw.
inline double s_k_ratio(const BoundInputs& in, const Spectrum& s, std::size_t k) {
  const double sum = detail::partial_sum(s, k, "s_k_ratio");
  const double mean_shifted = sum / k - in.vw_mean;
  return mean_shifted / (in.nu / (in.nu + 2.0) * in.weyl_scale(k));
}

/// μ̃_k <= (1 + 2√((1 − S_k)/(ν+2))) (H_Ω k/|Ω|)^{2/ν} ∮w.
inline BoundReport individual_bound_sk(const BoundInputs& in, const Spectrum& s, std::size_t k) {
  in.validate();
  if (s.size() < k + 1)
    throw InsufficientSpectrum("individual_bound_sk: spectrum must cover index k");
  const double Sk = s_k_ratio(in, s, k);
  const double tol = kHoldsTolerance * (1.0 + std::fabs(Sk));
  const double coeff = 1.0 + 2.0 * std::sqrt(std::max(0.0, 1.0 - Sk) / (in.nu + 2.0));
  const double mu_tilde = s.values[k] - in.vw_mean;
  BoundReport r = make_report("individual_sk", static_cast<double>(k), coeff * in.weyl_scale(k), mu_tilde,
                              Direction::upper, "S_k=" + format_g17(Sk));
  if (Sk > 1.0 + tol) {
    r.holds = false;
    r.notes += "; S_k exceeds 1: spectrum inconsistent with the sum bound";
  }
  return r;
}

struct PositiveSumReports {
  BoundReport implicit_form;
  BoundReport max_form;
};

/// When Σ_{j<k} μ_j >= 0:
///   μ_k (1 − ∮Ṽw/μ_k)_+^{1+2/ν} <= ((ν+2)/2)^{2/ν} (H_Ω k/|Ω|)^{2/ν} ∮w,
///   μ_k <= max{2∮Ṽw, 2(ν+2)^{2/ν} (H_Ω k/|Ω|)^{2/ν} ∮w}.
inline PositiveSumReports individual_bound_pos(const BoundInputs& in, const Spectrum& s, std::size_t k) {
  in.validate();
  if (s.size() < k + 1)
    throw InsufficientSpectrum("individual_bound_pos: spectrum must cover index k");
  const double sum = detail::partial_sum(s, k, "individual_bound_pos");
  if (sum < -kHoldsTolerance * (1.0 + std::fabs(sum)))
    throw InvalidInput("individual_bound_pos: requires a non-negative partial sum, got " + format_g17(sum));
  const double e = 2.0 / in.nu;
  const double mu = s.values[k];
  const double B = in.vw_mean;
  const double lhs = mu > B && mu > 0.0 ? mu * std::pow(1.0 - B / mu, 1.0 + e) : 0.0;
  const double scale = in.weyl_scale(k);
  PositiveSumReports out;
  out.implicit_form = make_report("individual_pos_implicit", static_cast<double>(k),
                                  std::pow((in.nu + 2.0) / 2.0, e) * scale, lhs, Direction::upper);
  out.max_form = make_report("individual_pos_max", static_cast<double>(k),
                             std::max(2.0 * B, 2.0 * std::pow(in.nu + 2.0, e) * scale), mu,
                             Direction::upper);
  return out;
}

}  // namespace spectral_bounds
