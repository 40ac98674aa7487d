#pragma once

// Planar lattices, their duals, and Gaussian lattice sums: the torus heat
// trace (dual side and Poisson side) and the hexagonal theta function.

#include <array>
#include <cmath>
#include <numbers>

#include "spectral_bounds/error.hpp"

namespace spectral_bounds {

using Vec2 = std::array<double, 2>;

/// Lattice ℤe1 ⊕ ℤe2 in the plane.
class Lattice2 {
 public:
  Lattice2() : Lattice2({1.0, 0.0}, {0.0, 1.0}) {}
  Lattice2(Vec2 e1, Vec2 e2) : e1_(e1), e2_(e2) {
    const double d = det();
    const double scale = std::hypot(e1[0], e1[1]) * std::hypot(e2[0], e2[1]);
    if (!(std::fabs(d) > 1e-12 * scale) || !std::isfinite(d))
      throw InvalidInput("Lattice2: basis vectors are linearly dependent");
  }

  const Vec2& e1() const { return e1_; }
  const Vec2& e2() const { return e2_; }

  double det() const { return e1_[0] * e2_[1] - e1_[1] * e2_[0]; }
  double covolume() const { return std::fabs(det()); }

  /// Dual basis with e_i · e_j* = δ_ij.
  Lattice2 dual() const {
    const double d = det();
    return Lattice2({e2_[1] / d, -e2_[0] / d}, {-e1_[1] / d, e1_[0] / d});
  }

  /// Gram matrix entries (g11, g12, g22).
  std::array<double, 3> gram() const {
    return {e1_[0] * e1_[0] + e1_[1] * e1_[1], e1_[0] * e2_[0] + e1_[1] * e2_[1],
            e2_[0] * e2_[0] + e2_[1] * e2_[1]};
  }

  Vec2 point(long m, long n) const {
    return {m * e1_[0] + n * e2_[0], m * e1_[1] + n * e2_[1]};
  }

  bool is_orthogonal(double tol = 1e-12) const {
    const auto g = gram();
    return std::fabs(g[1]) <= tol * std::sqrt(g[0] * g[2]);
  }

 private:
  Vec2 e1_, e2_;
};

namespace detail {

inline double smallest_gram_eigenvalue(const std::array<double, 3>& g) {
  const double tr = g[0] + g[2];
  const double dt = g[0] * g[2] - g[1] * g[1];
  return 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * dt, 0.0)));
}

// Σ_{(m,n) ∈ ℤ²} exp(-alpha · (m,n) G (m,n)ᵀ), summed over shells of constant
// max(|m|, |n|). Stops once a shell adds less than `rel_tol` of the running sum
// and a Gaussian majorant of every later shell is below the same threshold.
inline double gaussian_lattice_sum(const std::array<double, 3>& g, double alpha,
                                   double rel_tol = 1e-14) {
  const double lmin = smallest_gram_eigenvalue(g);
  auto q = [&](long m, long n) {
    return g[0] * m * m + 2.0 * g[1] * m * n + g[2] * n * n;
  };
  double total = 1.0;  // origin
  for (long s = 1; s < 100000; ++s) {
    double shell = 0.0;
    for (long m = -s; m <= s; ++m) {
      shell += std::exp(-alpha * q(m, s)) + std::exp(-alpha * q(m, -s));
    }
    for (long n = -s + 1; n <= s - 1; ++n) {
      shell += std::exp(-alpha * q(s, n)) + std::exp(-alpha * q(-s, n));
    }
    total += shell;
    if (shell < rel_tol * total) {
      // Points on shell r satisfy |v|² >= r²·lmin, and there are 8r of them.
      double tail = 0.0;
      for (long r = s + 1; r < s + 100000; ++r) {
        const double term = 8.0 * r * std::exp(-alpha * lmin * r * r);
        tail += term;
        if (term < 1e-3 * rel_tol * total) break;
      }
      if (tail < rel_tol * total) break;
    }
  }
  return total;
}

}  // namespace detail

/// Heat trace of the flat torus ℝ²/Γ: Σ_{ξ ∈ Γ*} exp(-4π²|ξ|² t).
inline double lattice_heat_trace(const Lattice2& g, double t) {
  if (!(t > 0.0)) throw InvalidInput("lattice_heat_trace: t must be positive");
  return detail::gaussian_lattice_sum(g.dual().gram(), 4.0 * std::numbers::pi * std::numbers::pi * t);
}

/// The same trace through Poisson summation: |Ω|/(4πt) Σ_{γ ∈ Γ} exp(-|γ|²/4t).
inline double lattice_heat_trace_poisson(const Lattice2& g, double t) {
  if (!(t > 0.0)) throw InvalidInput("lattice_heat_trace_poisson: t must be positive");
  return g.covolume() / (4.0 * std::numbers::pi * t) *
         detail::gaussian_lattice_sum(g.gram(), 1.0 / (4.0 * t));
}

/// Θ(t) = (1/4πt) Σ_{(p,q) ∈ ℤ²} exp(-(p² + q² + pq)/4t).
inline double hex_theta(double t) {
  if (!(t > 0.0)) throw InvalidInput("hex_theta: t must be positive");
  return detail::gaussian_lattice_sum({1.0, 0.5, 1.0}, 1.0 / (4.0 * t)) /
         (4.0 * std::numbers::pi * t);
}

/// Heat trace of the torus over the unit-covolume hexagonal lattice, written
/// through Θ: (√3/2)·Θ(√3 s/2). The quadratic form p² + q² + pq in Θ belongs to
/// a hexagonal lattice of covolume √3/2; rescaling to covolume 1 gives this.
inline double hex_theta_unit_covolume(double s) {
  const double c = std::sqrt(3.0) / 2.0;
  return c * hex_theta(c * s);
}

/// Hexagonal lattice with covolume `area` (basis a(1,0), a(1/2, √3/2)).
inline Lattice2 hexagonal_lattice(double area = 1.0) {
  const double a = std::sqrt(2.0 * area / std::sqrt(3.0));
  return Lattice2({a, 0.0}, {0.5 * a, 0.5 * std::sqrt(3.0) * a});
}

}  // namespace spectral_bounds
