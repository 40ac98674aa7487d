#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spectral_bounds/fd_solver.hpp"

using namespace spectral_bounds;
using std::numbers::pi;

namespace {
const double kPi2 = pi * pi;

ProblemSpec square(Expr w = Expr::constant(1.0), Expr rho = Expr::constant(0.0),
                   Expr V = Expr::constant(0.0)) {
  return ProblemSpec(Domain::box({1.0, 1.0}), w, rho, V);
}
}  // namespace

TEST(Assemble, NeumannCompatibility) {
  const ProblemSpec p = square();
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 10));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.dof_count());
  EXPECT_LT((f.K * one).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(f.M.minCoeff(), 0.0);
  const Eigen::SparseMatrix<double> KT = f.K.transpose();
  EXPECT_LT((f.K - KT).norm(), 1e-12 * f.K.norm());
}

TEST(Assemble, ConstantPotentialAddsMass) {
  const ProblemSpec p0 = square(parse_field("1 + x/2"), parse_field("x*y"));
  const ProblemSpec p1 = square(parse_field("1 + x/2"), parse_field("x*y"), Expr::constant(3.0));
  const QuadratureGrid g = QuadratureGrid::uniform(p0.domain, 12);
  const DiscreteForm f0 = assemble(p0, g), f1 = assemble(p1, g);
  // V enters as V·w·e^{−2ρ}, so a constant c adds c·w·M.
  std::vector<double> x(2);
  for (std::size_t d = 0; d < f0.dof_count(); ++d) {
    g.node(f0.node_of_dof[d], x);
    const auto i = static_cast<Eigen::Index>(d);
    EXPECT_NEAR(f1.K.coeff(i, i) - f0.K.coeff(i, i), 3.0 * (1 + x[0] / 2) * f0.M[i], 1e-12);
  }
  const ProblemSpec q0 = square(), q1 = square(Expr::constant(1.0), Expr::constant(0.0), Expr::constant(2.5));
  const DiscreteForm h0 = assemble(q0, g), h1 = assemble(q1, g);
  Eigen::SparseMatrix<double> diff = h1.K - h0.K;
  Eigen::SparseMatrix<double> cm(static_cast<Eigen::Index>(h0.dof_count()), static_cast<Eigen::Index>(h0.dof_count()));
  for (Eigen::Index i = 0; i < cm.rows(); ++i) cm.insert(i, i) = 2.5 * h0.M[i];
  EXPECT_LT((diff - cm).norm(), 1e-13);
}

TEST(Assemble, PositiveSemidefiniteForNonNegativePotential) {
  const ProblemSpec p = square(parse_field("2 + sin(3*x)"), parse_field("x - y"), parse_field("x^2"));
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 16));
  std::mt19937 gen(5);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd v(f.dof_count());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = n01(gen);
    EXPECT_GE(v.dot(f.K * v), 0.0);
  }
}

TEST(Assemble, RejectsCoarseGridsAndBadWeights) {
  const ProblemSpec p = square();
  EXPECT_THROW(assemble(p, QuadratureGrid::uniform(p.domain, 4)), InvalidInput);
  const ProblemSpec bad = square(parse_field("x - 0.5"));
  EXPECT_THROW(assemble(bad, QuadratureGrid::uniform(bad.domain, 10)), InvalidInput);
}

TEST(SolveLowest, DenseAndIterativeAgree) {
  const ProblemSpec p = square(parse_field("1 + x/2"), parse_field("(x^2+y^2)/4"), parse_field("x*y"));
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 30));
  SolverOptions o;
  o.k = 8;
  o.method = SolverMethod::dense;
  const Spectrum d = solve_lowest(f, o);
  o.method = SolverMethod::iterative;
  const Spectrum it = solve_lowest(f, o);
  ASSERT_GE(d.size(), 8u);
  ASSERT_GE(it.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(d[i], it[i], 1e-8 * (1 + d[i]));
  for (double r : it.residuals) EXPECT_LE(r, 1e-7);
}

TEST(SolveLowest, UnitSquareLaplacian) {
  const ProblemSpec p = square();
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 100));
  SolverOptions o;
  o.k = 6;
  const Spectrum s = solve_lowest(f, o);
  const double want[6] = {0, kPi2, kPi2, 2 * kPi2, 4 * kPi2, 4 * kPi2};
  ASSERT_GE(s.size(), 6u);
  EXPECT_LE(std::fabs(s[0]), 1e-8);
  for (int i = 1; i < 6; ++i) EXPECT_NEAR(s[i], want[i], 0.01 * want[i]);
  EXPECT_EQ(s.cutoff, s.values.back());
}

TEST(SolveLowest, ReturnsWholeDegenerateCluster) {
  const ProblemSpec p = square();
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 20));
  SolverOptions o;
  o.k = 2;  // index 1 sits in the double eigenvalue π²
  const Spectrum s = solve_lowest(f, o);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_NEAR(s[1], s[2], 1e-9);
}

TEST(SolveLowest, HarmonicOscillatorSurrogate) {
  const ProblemSpec p(Domain::box({16.0, 16.0}, {-8.0, -8.0}), Expr::constant(1.0), Expr::constant(0.0),
                      parse_field("x^2+y^2"));
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 160));
  SolverOptions o;
  o.k = 6;
  const Spectrum s = solve_lowest(f, o);
  const double want[6] = {2, 4, 4, 6, 6, 6};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s[i], want[i], 0.02 * want[i]);
}

TEST(SolveLowest, ConstantDensityScalesMass) {
  const ProblemSpec p = square(Expr::constant(1.0), Expr::constant(0.7));
  const ProblemSpec q = square();
  const QuadratureGrid g = QuadratureGrid::uniform(p.domain, 16);
  SolverOptions o;
  o.k = 5;
  const Spectrum a = solve_lowest(assemble(p, g), o), b = solve_lowest(assemble(q, g), o);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-10 * (1 + b[i]));
}

TEST(SolveLowest, GaugeInvariance) {
  // ρ → ρ + c multiplies both densities w e^{−2ρ} and e^{−2ρ} by e^{−2c}.
  const double c = 0.8;
  const ProblemSpec p = square(parse_field("1 + x/2"), parse_field("x*y"), parse_field("y^2"));
  const ProblemSpec q = square(parse_field("1 + x/2"), parse_field("x*y") + Expr::constant(c), parse_field("y^2"));
  const QuadratureGrid g = QuadratureGrid::uniform(p.domain, 24);
  SolverOptions o;
  o.k = 6;
  const Spectrum a = solve_lowest(assemble(p, g), o), b = solve_lowest(assemble(q, g), o);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a[i], b[i], 1e-10 * (1 + a[i]));
}

TEST(SolveLowest, PotentialMonotonicity) {
  const ProblemSpec p = square();
  const ProblemSpec q = square(Expr::constant(1.0), Expr::constant(0.0), parse_field("0.1*(x^2+y^2)"));
  const QuadratureGrid g = QuadratureGrid::uniform(p.domain, 24);
  SolverOptions o;
  o.k = 10;
  const Spectrum a = solve_lowest(assemble(p, g), o), b = solve_lowest(assemble(q, g), o);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_GE(b[i], a[i] - 1e-10);
}

TEST(SolveLowest, Preconditions) {
  const ProblemSpec p = square();
  const DiscreteForm f = assemble(p, QuadratureGrid::uniform(p.domain, 100));
  SolverOptions o;
  o.method = SolverMethod::dense;
  EXPECT_THROW(solve_lowest(f, o), SolverError);
  o.k = 0;
  EXPECT_THROW(solve_lowest(f, o), InvalidInput);
}

TEST(SolveLowest, PeriodicTorusMatchesExactSpectrum) {
  const ProblemSpec p(Domain::torus(Lattice2({2, 0}, {0, 1})));
  const DiscreteForm f = assemble(p, QuadratureGrid(p.domain, {64, 32}));
  SolverOptions o;
  o.k = 7;
  const Spectrum s = solve_lowest(f, o);
  const Spectrum exact = flatten(torus_spectrum(Lattice2({2, 0}, {0, 1}), 4 * kPi2 * 1.01));
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(s[i], exact[i], 0.01 * (1 + exact[i]));
  EXPECT_THROW(assemble(ProblemSpec(Domain::torus(Lattice2({1, 0}, {0.5, 1}))),
                        QuadratureGrid::uniform(Domain::torus(Lattice2({1, 0}, {0.5, 1})), 16)),
               InvalidInput);
}

TEST(ConvergenceStudy, SquareIsSecondOrder) {
  const ProblemSpec p = square();
  const Spectrum exact = rectangle_neumann_exact(1, 1, 3);
  const ConvergenceTable t = convergence_study(p, {{25, 25}, {50, 50}, {100, 100}}, 3, exact.values);
  for (const auto& row : t.rows) EXPECT_LE(std::fabs(row.values[0]), 1e-8);
  const double ratio = t.rows[1].errors[1] / t.rows[2].errors[1];
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
  EXPECT_THROW(convergence_study(p, {{10, 10}, {30, 30}}, 2), InvalidInput);
}

TEST(ConvergenceStudy, DiskStaircaseAtLeastFirstOrder) {
  const ProblemSpec p(Domain::disk(1.0, {0.0, 0.0}));
  // μ_1 of the unit disk is (j'_{1,1})², j'_{1,1} = 1.8411837813.
  const double mu1 = 1.8411837813406593 * 1.8411837813406593;
  const std::vector<std::vector<int>> grids = {{16, 16}, {32, 32}, {64, 64}};
  const ConvergenceTable t = convergence_study(p, grids, 2, std::vector<double>{0.0, mu1});
  EXPECT_GE(t.observed_order[1], 1.0);
  const ConvergenceTable r = convergence_study(p, grids, 2);
  EXPECT_FALSE(r.reference_is_oracle);
  EXPECT_GE(r.observed_order[1], 1.0);
  EXPECT_NEAR(r.reference[1], mu1, 0.1 * mu1);
}
