#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_bounds/bounds.hpp"
#include "spectral_bounds/fd_solver.hpp"

using namespace spectral_bounds;

namespace {

constexpr double kPi = std::numbers::pi;

BoundInputs unit_square_inputs() {
  BoundInputs in;
  in.nu = 2;
  in.volume = 1.0;
  in.w_mean = 1.0;
  in.vw_mean = 0.0;
  in.H = euclidean_H(2);
  return in;
}

// Independent golden-section maximiser of pz − A(z−B)_+^{1+ν/2} over z ≥ B.
double golden_sup(double A, double B, int nu, double p) {
  auto g = [&](double z) { return p * z - A * std::pow(std::max(z - B, 0.0), 1.0 + 0.5 * nu); };
  double lo = B, hi = B + 1.0;
  while (g(hi) > g(hi - 1e-3 * (hi - B))) hi = B + 2.0 * (hi - B);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < 300; ++i) {
    if (g(c) > g(d)) b = d;
    else a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return std::max(g(0.5 * (a + b)), g(std::max(0.0, B)));
}

}  // namespace

TEST(BoundReport, SlackAndToleranceSemantics) {
  const BoundReport up = make_report("x", 1.0, 2.0, 1.0, Direction::upper);
  EXPECT_TRUE(up.holds);
  EXPECT_DOUBLE_EQ(up.slack, 0.5);
  const BoundReport lo = make_report("x", 1.0, 1.0, 4.0, Direction::lower);
  EXPECT_TRUE(lo.holds);
  EXPECT_DOUBLE_EQ(lo.slack, 0.25);
  EXPECT_TRUE(make_report("x", 0, 1.0, 1.0 + 1e-10, Direction::upper).holds);
  EXPECT_FALSE(make_report("x", 0, 1.0, 1.0 + 1e-8, Direction::upper).holds);
  EXPECT_FALSE(make_report("x", 0, NAN, 0.0, Direction::upper).holds);
  EXPECT_EQ(make_report("x", 1, 2, 3, Direction::upper).digest, make_report("x", 1, 2, 3, Direction::upper).digest);
  EXPECT_NE(make_report("x", 1, 2, 3, Direction::upper).digest, make_report("x", 1, 2, 4, Direction::upper).digest);
}

TEST(KrogerBound, UnitSquareK4) {
  const auto in = unit_square_inputs();
  const Spectrum s = rectangle_neumann_exact(1, 1, 4);
  const BoundReport r = kroger_avg_bound(in, s, 4);
  EXPECT_NEAR(r.bound, 4 * 8 * kPi, 1e-10);
  EXPECT_NEAR(r.computed, 4 * kPi * kPi, 1e-10);
  EXPECT_TRUE(r.holds);
}

TEST(KrogerBound, KOneAndShortSpectrum) {
  const auto in = unit_square_inputs();
  const Spectrum s = rectangle_neumann_exact(1, 1, 3);
  const BoundReport r = kroger_avg_bound(in, s, 1);
  EXPECT_GE(r.bound, 0.0);
  EXPECT_EQ(r.computed, 0.0);
  EXPECT_TRUE(r.holds);
  EXPECT_THROW(kroger_avg_bound(in, s, 4), InsufficientSpectrum);
}

TEST(KrogerBound, WeylSaturationOnUnitSquare) {
  const auto in = unit_square_inputs();
  const Spectrum s = rectangle_neumann_exact(1, 1, 50);
  double prev = 0.0;
  for (std::size_t k : {5, 10, 20, 50}) {
    const BoundReport r = kroger_avg_bound(in, s, k);
    EXPECT_TRUE(r.holds);
    EXPECT_GT(r.slack, prev) << k;
    EXPECT_LE(r.slack, 1.0);
    prev = r.slack;
  }
  for (std::size_t k = 1; k <= 50; ++k) EXPECT_TRUE(kroger_avg_bound(in, s, k).holds) << k;
}

TEST(GeneralSumBound, DefaultHMatchesKroger) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int i = 0; i < 20; ++i) {
    BoundInputs in{2, u(gen), u(gen), u(gen) - 1.0, euclidean_H(2)};
    for (double k : {1.0, 3.0, 17.0})
      EXPECT_NEAR(general_average_rhs(in, k), kroger_average_rhs(in, k),
                  1e-12 * std::fabs(kroger_average_rhs(in, k)));
  }
  BoundInputs in3{3, 2.0, 1.5, 0.3, euclidean_H(3)};
  EXPECT_NEAR(general_average_rhs(in3, 7), kroger_average_rhs(in3, 7), 1e-12 * kroger_average_rhs(in3, 7));
}

TEST(GeneralSumBound, SchrodingerOnUnitSquare) {
  const ProblemSpec p(Domain::box({1, 1}), Expr::constant(1), Expr::constant(0), parse_field("x^2+y^2"));
  const BoundInputs in = BoundInputs::from(p);
  EXPECT_NEAR(in.vw_mean, 2.0 / 3.0, 1e-5);
  EXPECT_NEAR(general_average_rhs(in, 5), 0.5 * 4 * kPi * 5 + in.vw_mean, 1e-12);
  SolverOptions o;
  o.k = 6;
  o.method = SolverMethod::iterative;
  const Spectrum s = solve_problem(p, QuadratureGrid::uniform(p.domain, 40), o);
  EXPECT_TRUE(general_sum_bound(in, s, 5).holds);
}

TEST(RieszBound, BelowShiftIsZero) {
  auto in = unit_square_inputs();
  in.vw_mean = 5.0;
  EXPECT_EQ(riesz_bound_value(in, 4.0), 0.0);
  const Spectrum s({5.0, 6.0}, 10.0);
  EXPECT_TRUE(riesz_lower_bound(in, s, 4.0).holds);
}

TEST(RieszBound, UnitSquareZ30) {
  const auto in = unit_square_inputs();
  const Spectrum s = box_neumann_upto({1, 1}, 40.0);
  const BoundReport r = riesz_lower_bound(in, s, 30.0);
  EXPECT_NEAR(r.bound, 900.0 / (8 * kPi), 1e-10);
  EXPECT_NEAR(r.computed, 120.0 - 4 * kPi * kPi, 1e-10);
  EXPECT_TRUE(r.holds);
  EXPECT_THROW(riesz_lower_bound(in, s, 41.0), InsufficientSpectrum);
}

TEST(Legendre, ClosedFormExamples) {
  EXPECT_EQ(legendre_conjugate_power(1.0, 0.0, 2, 0.0), 0.0);
  EXPECT_NEAR(legendre_conjugate_power(1.0, 0.0, 2, 2.0), 1.0, 1e-15);
}

TEST(Legendre, MatchesGoldenSectionOnRandomInputs) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> uA(0.1, 3.0), uB(-2.0, 3.0), up(0.0, 20.0);
  std::uniform_int_distribution<int> unu(1, 4);
  for (int i = 0; i < 50; ++i) {
    const double A = uA(gen), B = uB(gen), p = up(gen);
    const int nu = unu(gen);
    const double closed = legendre_conjugate_power(A, B, nu, p);
    EXPECT_NEAR(closed, golden_sup(A, B, nu, p), 1e-8 * std::max(1.0, std::fabs(closed)))
        << A << " " << B << " " << nu << " " << p;
  }
}

TEST(Legendre, RieszBoundTransformsToSumBound) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.3, 2.5);
  for (int nu : {1, 2, 3}) {
    for (int i = 0; i < 5; ++i) {
      BoundInputs in{nu, u(gen), u(gen), u(gen) - 0.5, euclidean_H(nu)};
      const auto [A, B] = riesz_bound_coefficients(in);
      for (int k = 1; k <= 12; ++k) {
        const double lt = legendre_conjugate_power(A, B, nu, k);
        const double sum = k * general_average_rhs(in, k);
        EXPECT_NEAR(lt, sum, 1e-9 * std::max(1.0, std::fabs(sum)));
      }
    }
  }
}

TEST(HeatBound, UnitSquare) {
  const auto in = unit_square_inputs();
  const Spectrum s = box_neumann_upto({1, 1}, 4000.0);
  for (double t : {0.1, 0.5, 1.0}) {
    EXPECT_NEAR(heat_bound_value(in, t), 1.0 / (4 * kPi * t), 1e-14);
    const BoundReport r = heat_lower_bound(in, s, t);
    EXPECT_TRUE(r.holds) << t;
    // Factorised exact trace: (Σ_m e^{−π²m²t})².
    double f = 0.0;
    for (int m = 0; m < 200; ++m) f += std::exp(-kPi * kPi * m * m * t);
    EXPECT_NEAR(r.computed, f * f, 1e-9);
  }
  const BoundReport big = heat_lower_bound(in, s, 1e3);
  EXPECT_NEAR(big.computed, 1.0, 1e-12);
  EXPECT_TRUE(big.holds);
}

TEST(HeatBound, IntroDisplayIdentity) {
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int nu : {1, 2, 3}) {
    BoundInputs in{nu, u(gen), u(gen), u(gen), euclidean_H(nu)};
    const double t = u(gen);
    const double intro = in.volume / std::pow(4 * kPi * t, 0.5 * nu) * std::pow(in.w_mean, -0.5 * nu) *
                         std::exp(-t * in.vw_mean);
    EXPECT_NEAR(heat_bound_value(in, t) * std::exp(-t * in.vw_mean), intro, 1e-12 * intro);
  }
}

TEST(IndividualBound, SkUnitSquare) {
  const auto in = unit_square_inputs();
  const Spectrum s = rectangle_neumann_exact(1, 1, 30);
  const BoundReport r1 = individual_bound_sk(in, s, 1);
  EXPECT_EQ(s_k_ratio(in, s, 1), 0.0);
  EXPECT_NEAR(r1.bound, 8 * kPi, 1e-12);
  EXPECT_NEAR(r1.computed, kPi * kPi, 1e-12);
  EXPECT_TRUE(r1.holds);
  for (std::size_t k = 1; k < 30; ++k) {
    EXPECT_LE(s_k_ratio(in, s, k), 1.0);
    EXPECT_TRUE(individual_bound_sk(in, s, k).holds) << k;
  }
  EXPECT_THROW(individual_bound_sk(in, s, 30), InsufficientSpectrum);
}

TEST(IndividualBound, SkSaturationAndViolation) {
  // Choose values with S_1 = 1 exactly: μ_0 = (ν/(ν+2))·scale.
  const auto in = unit_square_inputs();
  const double scale = in.weyl_scale(1);
  const BoundReport sat = individual_bound_sk(in, Spectrum::complete({0.5 * scale, scale}), 1);
  EXPECT_NEAR(sat.bound, scale, 1e-12);
  const BoundReport bad = individual_bound_sk(in, Spectrum::complete({0.6 * scale, scale}), 1);
  EXPECT_FALSE(bad.holds);
  EXPECT_NE(bad.notes.find("S_k exceeds 1"), std::string::npos);
}

TEST(IndividualBound, PositiveSumForms) {
  const auto in = unit_square_inputs();
  const Spectrum s = rectangle_neumann_exact(1, 1, 30);
  const auto r = individual_bound_pos(in, s, 1);
  EXPECT_NEAR(r.max_form.bound, 32 * kPi, 1e-12);
  EXPECT_NEAR(r.implicit_form.bound, 2 * 4 * kPi, 1e-12);
  EXPECT_TRUE(r.max_form.holds);
  EXPECT_TRUE(r.implicit_form.holds);
  for (std::size_t k = 1; k < 30; ++k) {
    const auto q = individual_bound_pos(in, s, k);
    EXPECT_TRUE(q.max_form.holds && q.implicit_form.holds) << k;
    EXPECT_NEAR(q.max_form.bound, 2 * 4 * 4 * kPi * k, 1e-9 * k);
  }
  EXPECT_THROW(individual_bound_pos(in, Spectrum::complete({-3.0, 1.0}), 1), InvalidInput);
}

TEST(IndividualBound, WittenGaussianUsesGradientShift) {
  const ProblemSpec p(Domain::box({2, 2}, {-1, -1}), Expr::constant(1), parse_field("(x^2+y^2)/4"));
  const BoundInputs in = BoundInputs::from(p);
  // ∮|∇ρ|² = ∮|x|²/4 = (1/4)(2/3) on [−1,1]².
  EXPECT_NEAR(in.vw_mean, 1.0 / 6.0, 1e-5);
  SolverOptions o;
  o.k = 12;
  o.method = SolverMethod::iterative;
  const Spectrum s = solve_problem(p, QuadratureGrid::uniform(p.domain, 40), o);
  for (std::size_t k = 1; k < 11; ++k) {
    EXPECT_TRUE(general_sum_bound(in, s, k).holds) << k;
    EXPECT_TRUE(individual_bound_sk(in, s, k).holds) << k;
    const auto q = individual_bound_pos(in, s, k);
    EXPECT_TRUE(q.max_form.holds && q.implicit_form.holds) << k;
  }
}
