#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spectral_bounds/fd_solver.hpp"
#include "spectral_bounds/homogeneous.hpp"

using namespace spectral_bounds;

namespace {

constexpr double kPi = std::numbers::pi;

const Lattice2 kZ2({1, 0}, {0, 1});

// Brute-force Σ over (p, q) of f(4π²(p² + q²)).
template <class F>
double z2_sum(F f, int range = 60) {
  double s = 0.0;
  for (int p = -range; p <= range; ++p)
    for (int q = -range; q <= range; ++q) s += f(4 * kPi * kPi * (p * p + q * q));
  return s;
}

}  // namespace

TEST(HomogRiesz, EqualityWhenOmegaIsM) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 500.0);
  const Spectrum mu = flatten(h);
  for (double z : {-1.0, 0.0, 10.0, 39.5, 250.0, 500.0}) {
    const BoundReport r = homog_riesz_compare(mu, h, 1.0, z);
    EXPECT_NEAR(r.computed, r.bound, 1e-10 * (1 + r.bound));
    EXPECT_TRUE(r.holds);
  }
}

TEST(HomogRiesz, HalfTorusRectangle) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 40 * kPi * kPi);
  const Spectrum mu = box_neumann_upto({0.5, 1.0}, 40 * kPi * kPi);
  const BoundReport r = homog_riesz_compare(mu, h, 0.5, 30.0);
  // μ < 30: {0, π²}; λ < 30: {0}.
  EXPECT_NEAR(r.computed, 60.0 - kPi * kPi, 1e-12);
  EXPECT_NEAR(r.bound, 15.0, 1e-12);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.bound, 0.5 * z2_sum([](double l) { return std::max(30.0 - l, 0.0); }), 1e-9);
  for (int i = 0; i <= 40; ++i) {
    const double z = 40 * kPi * kPi * i / 40.0;
    EXPECT_TRUE(homog_riesz_compare(mu, h, 0.5, z).holds) << z;
  }
  EXPECT_EQ(homog_riesz_compare(mu, h, 0.5, -1.0).bound, 0.0);
  EXPECT_EQ(homog_riesz_compare(mu, h, 0.5, -1.0).computed, 0.0);
  EXPECT_THROW(homog_riesz_compare(mu, h, 0.5, 41 * kPi * kPi), InsufficientSpectrum);
  EXPECT_THROW(homog_riesz_compare(mu, h, 1.5, 1.0), InvalidInput);
}

TEST(HomogSum, HalfTorusRectangle) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 200 * kPi * kPi);
  const Spectrum mu = rectangle_neumann_exact(0.5, 1.0, 40);
  const BoundReport r = homog_sum_compare(mu, h, 0.5, 2.0);
  EXPECT_NEAR(r.computed, kPi * kPi, 1e-12);
  EXPECT_NEAR(r.bound, 6 * kPi * kPi, 1e-12);
  EXPECT_TRUE(r.holds);
  for (int k = 1; k <= 30; ++k) EXPECT_TRUE(homog_sum_compare(mu, h, 0.5, k).holds) << k;
  const BoundReport f = homog_sum_compare(mu, h, 0.5, 1.5);
  EXPECT_NEAR(f.computed, 0.5 * kPi * kPi, 1e-12);
  EXPECT_NEAR(f.bound, 0.5 * (0 + 4 * kPi * kPi * 2), 1e-12);
  EXPECT_TRUE(f.holds);
}

TEST(HomogSum, EqualityOnWholeTorus) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 100 * kPi * kPi);
  const Spectrum mu = flatten(h);
  for (int k = 1; k <= 60; ++k) {
    const BoundReport r = homog_sum_compare(mu, h, 1.0, k);
    EXPECT_DOUBLE_EQ(r.computed, r.bound) << k;
    EXPECT_TRUE(r.holds);
  }
}

TEST(HomogSum, ShiftedSpectrumWithConstantFields) {
  // Ω = M with w ≡ 2 and V ≡ 3: μ_j = 2λ_j + 3 exactly.
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 100 * kPi * kPi);
  const HomogeneousSpectrum sh = shifted_spectrum(h, 2.0, 3.0);
  const Spectrum mu = flatten(sh);
  for (int k = 1; k <= 20; ++k) EXPECT_TRUE(homog_sum_compare(mu, sh, 1.0, k).holds);
}

TEST(HeatHomog, Examples) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 400 * kPi * kPi);
  const Spectrum whole = flatten(h);
  const BoundReport eq = heat_homog_compare(whole, h, 1.0, 0.3);
  EXPECT_NEAR(eq.computed, eq.bound, 1e-12);
  EXPECT_TRUE(eq.holds);

  const Spectrum mu = box_neumann_upto({0.5, 1.0}, 400 * kPi * kPi);
  const BoundReport r = heat_homog_compare(mu, h, 0.5, 0.3);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.bound, 0.5 * z2_sum([](double l) { return std::exp(-0.3 * l); }), 1e-12);
  double fx = 0, fy = 0;
  for (int m = 0; m < 50; ++m) {
    fx += std::exp(-0.3 * 4 * kPi * kPi * m * m);
    fy += std::exp(-0.3 * kPi * kPi * m * m);
  }
  EXPECT_NEAR(r.computed, fx * fy, 1e-12);

  const BoundReport late = heat_homog_compare(mu, h, 0.5, 50.0);
  EXPECT_NEAR(late.computed, 1.0, 1e-12);
  EXPECT_NEAR(late.bound, 0.5, 1e-12);
}

TEST(HeatHomog, TailIsAddedToTheComparisonSide) {
  const HomogeneousSpectrum h = torus_spectrum(kZ2, 4 * kPi * kPi);
  const TailModel tm{2, 1.0, 1.0, 0.0};
  const BoundReport with = heat_homog_compare(flatten(h), h, 1.0, 0.05, &tm);
  const BoundReport without = heat_homog_compare(flatten(h), h, 1.0, 0.05);
  EXPECT_GT(with.bound, without.bound);
  EXPECT_FALSE(with.holds);  // the truncated left side cannot beat the tail-augmented right side
}

TEST(HeatTorus, UnitSquareLattice) {
  BoundInputs in{2, 1.0, 1.0, 0.0, euclidean_H(2)};
  const Spectrum mu = flatten(torus_spectrum(kZ2, 4000.0));
  for (double t : {0.1, 0.3, 0.5, 1.0}) {
    const BoundReport r = heat_torus_bound(in, mu, t);
    EXPECT_NEAR(r.computed, lattice_heat_trace(kZ2, t), 1e-9) << t;
    EXPECT_NEAR(r.bound, hex_theta_unit_covolume(t), 1e-14);
    EXPECT_TRUE(r.holds) << t;
  }
}

TEST(HeatTorus, SmallTimeRatioTendsToOne) {
  BoundInputs in{2, 1.0, 1.0, 0.0, euclidean_H(2)};
  const Spectrum mu = flatten(torus_spectrum(kZ2, 20000.0));
  const BoundReport r = heat_torus_bound(in, mu, 0.01);
  const double ratio = r.computed / r.bound;
  EXPECT_GE(ratio, 1.0);
  EXPECT_LT(ratio, 1.0 + 1e-6);
}

TEST(HeatTorus, ConstantShiftKeepsVerdict) {
  const Spectrum mu = flatten(torus_spectrum(kZ2, 4000.0));
  const Spectrum shifted = flatten(shifted_spectrum(torus_spectrum(kZ2, 4000.0), 1.0, 2.5));
  BoundInputs a{2, 1.0, 1.0, 0.0, euclidean_H(2)};
  BoundInputs b{2, 1.0, 1.0, 2.5, euclidean_H(2)};
  for (double t : {0.1, 0.3, 1.0}) {
    const BoundReport ra = heat_torus_bound(a, mu, t);
    const BoundReport rb = heat_torus_bound(b, shifted, t);
    EXPECT_EQ(ra.holds, rb.holds);
    EXPECT_NEAR(rb.computed, ra.computed * std::exp(-2.5 * t), 1e-12);
    EXPECT_NEAR(rb.bound, ra.bound * std::exp(-2.5 * t), 1e-12);
  }
}

TEST(HeatTorus, RectangularLatticeWithWeight) {
  // Γ = 2ℤ × ℤ, w ≡ 3: μ = 3·4π²(m²/4 + n²).
  const Lattice2 g({2, 0}, {0, 1});
  const Spectrum mu = flatten(shifted_spectrum(torus_spectrum(g, 3000.0), 3.0, 0.0));
  BoundInputs in{2, 2.0, 3.0, 0.0, euclidean_H(2)};
  for (double t : {0.05, 0.1, 0.3, 1.0}) {
    const BoundReport r = heat_torus_bound(in, mu, t);
    EXPECT_NEAR(r.computed, lattice_heat_trace(g, 3 * t), 1e-9);
    EXPECT_TRUE(r.holds) << t;
  }
}

// w = 1 + x/4 is evaluated at coordinates reduced to the cell, i.e. periodicised.
TEST(HeatTorus, PeriodicFdSpectrumWithVariableFields) {
  const ProblemSpec p(Domain::torus(kZ2), parse_field("1 + x/4"), Expr::constant(0),
                      parse_field("sin(2*pi*x)"));
  const BoundInputs in = BoundInputs::from(p);
  SolverOptions o;
  o.k = 40;
  const Spectrum mu = solve_problem(p, QuadratureGrid::uniform(p.domain, 48), o);
  for (double t : {0.1, 0.3, 1.0}) EXPECT_TRUE(heat_torus_bound(in, mu, t).holds) << t;
}
