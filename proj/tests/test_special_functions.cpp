#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/special_functions.hpp"

using namespace spectral_bounds;
using std::numbers::pi;

TEST(UnitBallVolume, LowDimensions) {
  EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(2), pi, 1e-15);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * pi / 3.0, 1e-14);
  EXPECT_THROW(unit_ball_volume(0), InvalidInput);
}

TEST(Gamma, Recursion) {
  for (double x = 0.5; x <= 10.0; x += 0.25)
    EXPECT_NEAR(std::tgamma(x + 1.0), x * std::tgamma(x), 1e-12 * std::tgamma(x + 1.0));
}

// Independent J_p oracle: trapezoid on Bessel's integral for integer order,
// J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ (spectrally accurate).
static double bessel_integral(int n, double x) {
  const int N = 2000;
  double s = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double tau = pi * i / N;
    const double f = std::cos(n * tau - x * std::sin(tau));
    s += (i == 0 || i == N) ? 0.5 * f : f;
  }
  return s / N;
}

TEST(BesselJ, MatchesIntegralRepresentation) {
  for (int n : {0, 1, 2, 5})
    for (double x : {0.1, 1.0, 3.7, 8.0, 11.9, 12.5, 20.0, 35.0})
      EXPECT_NEAR(bessel_j(n, x), bessel_integral(n, x), 1e-12) << "n=" << n << " x=" << x;
}

TEST(BesselJ, HalfIntegerClosedForm) {
  for (double x : {0.5, 2.0, 9.0, 15.0, 40.0})
    EXPECT_NEAR(bessel_j(0.5, x), std::sqrt(2.0 / (pi * x)) * std::sin(x), 1e-12);
  for (double x : {0.5, 2.0, 9.0, 15.0, 40.0})
    EXPECT_NEAR(bessel_j(-0.5, x), std::sqrt(2.0 / (pi * x)) * std::cos(x), 1e-12);
}

TEST(BesselFirstZero, KnownValues) {
  EXPECT_NEAR(bessel_first_zero(0.5), pi, 1e-10);
  EXPECT_NEAR(bessel_first_zero(-0.5), pi / 2, 1e-10);
  EXPECT_NEAR(bessel_first_zero(0.0), 2.4048255577, 1e-9);
  EXPECT_NEAR(bessel_first_zero(1.0), 3.8317059702, 1e-9);
  EXPECT_NEAR(bessel_first_zero(2.0), 5.1356223018, 1e-9);
  EXPECT_THROW(bessel_first_zero(-1.0), InvalidInput);
  EXPECT_THROW(bessel_first_zero(51.0), InvalidInput);
}

TEST(BesselFirstZero, IsARoot) {
  for (double p : {0.0, 0.5, 1.0, 1.5, 2.0, 7.0, 20.0, 50.0}) {
    const double j = bessel_first_zero(p);
    EXPECT_NEAR(bessel_j(p, j), 0.0, 1e-9) << p;
    EXPECT_GT(j, p);
  }
}

TEST(HexTheta, SmallTLimit) {
  const double t = 0.01;
  EXPECT_LT(std::fabs(4 * pi * t * hex_theta(t) - 1.0), 1e-9);
}

TEST(HexTheta, LargeTLimit) {
  EXPECT_NEAR(hex_theta(10.0), 2.0 / std::sqrt(3.0), 1e-6);
}

TEST(HexTheta, MatchesDirectDoubleSum) {
  const double t = 0.5;
  double s = 0.0;
  for (int p = -60; p <= 60; ++p)
    for (int q = -60; q <= 60; ++q) s += std::exp(-(p * p + q * q + p * q) / (4 * t));
  EXPECT_NEAR(hex_theta(t), s / (4 * pi * t), 1e-12);
}

TEST(Lattice2, DualOfDualAndValidation) {
  const Lattice2 g({1.3, 0.2}, {-0.4, 0.9});
  const Lattice2 dd = g.dual().dual();
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(dd.e1()[i], g.e1()[i], 1e-12);
    EXPECT_NEAR(dd.e2()[i], g.e2()[i], 1e-12);
  }
  const Lattice2 d = g.dual();
  EXPECT_NEAR(g.e1()[0] * d.e1()[0] + g.e1()[1] * d.e1()[1], 1.0, 1e-14);
  EXPECT_NEAR(g.e1()[0] * d.e2()[0] + g.e1()[1] * d.e2()[1], 0.0, 1e-14);
  EXPECT_THROW(Lattice2({1, 2}, {2, 4}), InvalidInput);
}

TEST(LatticeHeatTrace, SquareLattice) {
  EXPECT_NEAR(lattice_heat_trace(Lattice2(), 50.0), 1.0, 1e-15);
  const double a = lattice_heat_trace(Lattice2(), 0.1);
  const double b = lattice_heat_trace_poisson(Lattice2(), 0.1);
  EXPECT_NEAR(a, b, 1e-10 * a);
}

TEST(LatticeHeatTrace, PoissonIdentityOnRandomLattices) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 20) {
    const Vec2 e1{1.0 + 0.5 * u(gen), 0.4 * u(gen)};
    const Vec2 e2{0.6 * u(gen), 1.0 + 0.5 * u(gen)};
    const Lattice2 g(e1, e2);
    for (double t : {0.05, 0.2, 1.0, 5.0}) {
      const double a = lattice_heat_trace(g, t);
      const double b = lattice_heat_trace_poisson(g, t);
      EXPECT_NEAR(a, b, 1e-9 * a);
      EXPECT_GE(a, 1.0);
    }
    ++checked;
  }
}

TEST(LatticeHeatTrace, MontgomeryMinimalityAgainstHexagonal) {
  // Among unit-covolume lattices the hexagonal one minimises the heat trace.
  const Lattice2 hex = hexagonal_lattice(1.0);
  EXPECT_NEAR(hex.covolume(), 1.0, 1e-14);
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    const double sq = lattice_heat_trace(Lattice2(), t);
    const double hx = lattice_heat_trace(hex, t);
    EXPECT_GE(sq, hx);
    EXPECT_NEAR(hex_theta_unit_covolume(t), hx, 1e-12 * hx);
  }
}
