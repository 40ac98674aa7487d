#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spectral_bounds/expr.hpp"

using namespace spectral_bounds;

TEST(ParseField, EvaluatesBasicExpressions) {
  EXPECT_DOUBLE_EQ(parse_field("sin(x)*y + 2")({0.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(parse_field("exp(-(x^2+y^2)/2)")({0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(parse_field("x1 + 2*x2 - x3")({1.0, 2.0, 3.0}), 2.0);
  EXPECT_DOUBLE_EQ(parse_field("min(x, y) + max(x, y)")({4.0, -1.0}), 3.0);
  EXPECT_DOUBLE_EQ(parse_field("abs(-2.5e0)")({}), 2.5);
  EXPECT_NEAR(parse_field("sin(2*pi*x)")({0.25}), 1.0, 1e-15);
}

TEST(ParseField, CaretBindsTighterThanUnaryMinus) {
  EXPECT_DOUBLE_EQ(parse_field("-x^2")({3.0}), -9.0);
  EXPECT_DOUBLE_EQ(parse_field("2^-1")({}), 0.5);
  EXPECT_DOUBLE_EQ(parse_field("x^(1/2)")({4.0}), 2.0);
}

TEST(ParseField, ReportsSyntaxErrorOffset) {
  try {
    parse_field("x +* y");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
    EXPECT_NE(std::string(e.what()).find("offset 3"), std::string::npos);
  }
}

TEST(ParseField, RejectsUnknownIdentifiersAndBadInput) {
  EXPECT_THROW(parse_field("foo(x)"), ParseError);
  EXPECT_THROW(parse_field("x0 + 1"), ParseError);
  EXPECT_THROW(parse_field("(x + 1"), ParseError);
  EXPECT_THROW(parse_field("x^y"), ParseError);
  EXPECT_THROW(parse_field(""), ParseError);
  EXPECT_THROW(parse_field("max(x)"), ParseError);
}

TEST(Expr, NonFiniteEvaluationThrows) {
  EXPECT_THROW(parse_field("log(x)")({0.0}), EvalError);
  EXPECT_THROW(parse_field("1/x")({0.0}), EvalError);
  EXPECT_THROW(parse_field("sqrt(x)")({-1.0}), EvalError);
}

TEST(Expr, PrettyPrintRoundTrips) {
  for (const char* src : {"sin(x)*y + 2", "exp(-(x^2+y^2)/2)", "-x^2", "(x - y) - (x - y)",
                          "x / (y * z)", "min(x, abs(y)) ^ 3", "1 + x/4", "2^-1*x",
                          "log(1 + x^2)/sqrt(2 + cos(y))"}) {
    const Expr e = parse_field(src);
    const Expr again = parse_field(e.str());
    EXPECT_TRUE(e.structurally_equals(again)) << src << " -> " << e.str();
    EXPECT_DOUBLE_EQ(e({0.3, 0.7, 1.1}), again({0.3, 0.7, 1.1})) << src;
  }
}

TEST(Differentiate, PolynomialAndTranscendental) {
  EXPECT_DOUBLE_EQ(differentiate(parse_field("x^2+y^2"), 0)({1.0, 1.0}), 2.0);
  EXPECT_DOUBLE_EQ(differentiate(parse_field("sin(x)*y"), 0)({0.0, 3.0}), 3.0);
  const double h = 1e-5;
  const Expr f = parse_field("exp(-x^2/2)");
  const double fd = (f({1.0 + h, 0.0}) - f({1.0 - h, 0.0})) / (2 * h);
  EXPECT_NEAR(differentiate(f, 0)({1.0, 0.0}), fd, 1e-9);
  EXPECT_NEAR(differentiate(f, 0)({1.0, 0.0}), -std::exp(-0.5), 1e-15);
}

TEST(Differentiate, DerivativeIsAValidExpression) {
  const Expr d = differentiate(parse_field("x^3*sin(y) + log(1+x^2)"), 1);
  EXPECT_TRUE(parse_field(d.str()).structurally_equals(d));
  EXPECT_TRUE(differentiate(parse_field("y^2"), 0).is_zero());
}

TEST(Differentiate, NonSmoothNodesAreOneSided) {
  const Expr a = differentiate(parse_field("abs(x)"), 0);
  EXPECT_EQ(a({0.0}), -1.0);
  EXPECT_EQ(a({2.0}), 1.0);
  const Expr mn = differentiate(parse_field("min(x, 2*x)"), 0);
  EXPECT_EQ(mn({0.0}), 1.0);   // tie: first argument
  EXPECT_EQ(mn({-1.0}), 2.0);
  const Expr mx = differentiate(parse_field("max(x, 2*x)"), 0);
  EXPECT_EQ(mx({0.0}), 1.0);
  EXPECT_EQ(mx({1.0}), 2.0);
  for (const Expr* d : {&a, &mn, &mx}) EXPECT_TRUE(parse_field(d->str()).structurally_equals(*d));
}

TEST(Differentiate, AgreesWithCentralDifferencesAtRandomPoints) {
  const char* fields[] = {"exp(-(x^2+y^2)/2)", "sin(x)*cos(2*y) + x^3", "log(2 + x^2 + y)",
                          "sqrt(1 + x^2*y^2)", "(x - y)/(3 + sin(x*y))", "x^(3/2)*y + 1/(1 + y^2)"};
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  const double h = 1e-5;
  for (const char* src : fields) {
    const Expr f = parse_field(src);
    for (int axis = 0; axis < 2; ++axis) {
      const Expr df = differentiate(f, axis);
      for (int i = 0; i < 100; ++i) {
        double x[2] = {u(gen), u(gen)};
        double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
        xp[axis] += h;
        xm[axis] -= h;
        const double fd = (f(xp) - f(xm)) / (2 * h);
        const double sym = df(x);
        EXPECT_NEAR(sym, fd, 1e-6 * std::max(1.0, std::fabs(sym))) << src << " axis " << axis;
      }
    }
  }
}

TEST(Expr, ArithmeticBuildersFoldConstants) {
  const Expr x = Expr::variable(0);
  EXPECT_TRUE((x * Expr::constant(0.0)).is_zero());
  EXPECT_EQ((Expr::constant(2.0) + Expr::constant(3.0)).constant_value(), 5.0);
  EXPECT_EQ(parse_field("x + y").max_variable(), 1);
  EXPECT_EQ(parse_field("3").max_variable(), -1);
}
