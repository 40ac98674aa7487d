#pragma once

// Invariant suites behind `spectral-bounds selftest`: fast checks that the
// library's identities and inequalities hold on reference inputs.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spectral_bounds/avp.hpp"
#include "spectral_bounds/bounds.hpp"
#include "spectral_bounds/homogeneous.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/phase_space.hpp"
#include "spectral_bounds/special_functions.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline CheckResult run_check(const std::string& name, const std::function<std::string(bool&)>& f) {
  CheckResult c{name, false, {}};
  try {
    c.passed = true;
    c.detail = f(c.passed);
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest(std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  std::vector<CheckResult> out;
  const BoundInputs square{2, 1.0, 1.0, 0.0, euclidean_H(2)};
  const Spectrum sq = rectangle_neumann_exact(1.0, 1.0, 60);

  out.push_back(detail::run_check("avp: random symmetric 12x12 instances", [&](bool& ok) {
    int bad = 0;
    for (const BoundReport& r : avp_random_instances(seed, 100, 12)) bad += !r.holds;
    ok = bad == 0;
    return std::to_string(100 - bad) + "/100 hold";
  }));

  out.push_back(detail::run_check("avp: eigenbasis equality", [&](bool& ok) {
    std::mt19937_64 rng(seed + 1);
    const Eigen::MatrixXd H = random_symmetric(rng, 12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    AvpFamily fam;
    for (Eigen::Index j = 0; j < 12; ++j) fam.push_back({es.eigenvectors().col(j), 1.0});
    const double z = 0.5 * (es.eigenvalues()(5) + es.eigenvalues()(6));
    std::vector<std::size_t> sub;
    for (std::size_t j = 0; j < 12; ++j)
      if (es.eigenvalues()(static_cast<Eigen::Index>(j)) <= z) sub.push_back(j);
    const BoundReport r = avp_check(H, fam, sub, z);
    const double gap = std::fabs(r.computed - r.bound);
    ok = gap <= 1e-10;
    return "|lhs - rhs| = " + format_g17(gap);
  }));

  out.push_back(detail::run_check("avp: tight-frame mean form, exhaustive at n = 8", [&](bool& ok) {
    std::mt19937_64 rng(seed + 2);
    const Eigen::MatrixXd H = random_symmetric(rng, 8);
    for (std::size_t k = 1; k <= 8; ++k) ok = ok && tight_frame_mean_check(H, doubled_basis_frame(8), k).holds;
    return std::string("k = 1..8");
  }));

  out.push_back(detail::run_check("kroger: unit square k <= 50, slack increasing", [&](bool& ok) {
    for (std::size_t k = 1; k <= 50; ++k) ok = ok && kroger_avg_bound(square, sq, k).holds;
    double prev = 0.0;
    for (std::size_t k : {5u, 10u, 20u, 50u}) {
      const double s = kroger_avg_bound(square, sq, k).slack;
      ok = ok && s > prev && s <= 1.0;
      prev = s;
    }
    return "slack(50) = " + format_g17(prev);
  }));

  out.push_back(detail::run_check("general sum equals kroger with Euclidean H", [&](bool& ok) {
    double worst = 0.0;
    for (std::size_t k = 1; k <= 50; ++k)
      worst = std::max(worst, std::fabs(general_sum_bound(square, sq, k).bound - kroger_avg_bound(square, sq, k).bound) /
                                  kroger_avg_bound(square, sq, k).bound);
    ok = worst <= 1e-12;
    return "max relative difference " + format_g17(worst);
  }));

  out.push_back(detail::run_check("legendre transform of the riesz bound is the sum bound", [&](bool& ok) {
    const auto [A, B] = riesz_bound_coefficients(square);
    double worst = 0.0;
    for (int p = 1; p <= 30; ++p) {
      const double lhs = legendre_conjugate_power(A, B, 2, p);
      const double rhs = general_sum_bound(square, sq, static_cast<std::size_t>(p)).bound;
      worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
    }
    ok = worst <= 1e-9;
    return "max relative difference " + format_g17(worst);
  }));

  out.push_back(detail::run_check("homogeneous sum comparison: equality on the torus", [&](bool& ok) {
    const HomogeneousSpectrum h = torus_spectrum(Lattice2({1, 0}, {0, 1}), 100 * pi * pi);
    const Spectrum mu = flatten(h);
    for (std::size_t k = 1; k <= 60; ++k) {
      const BoundReport r = homog_sum_compare(mu, h, 1.0, static_cast<double>(k));
      ok = ok && r.holds && std::fabs(r.computed - r.bound) <= 1e-9 * (1 + r.bound);
    }
    return std::string("k = 1..60");
  }));

  out.push_back(detail::run_check("lattice heat trace: Poisson identity on random lattices", [&](bool& ok) {
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> u(0.5, 1.5), a(-0.5, 0.5);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Lattice2 g({u(rng), 0.0}, {a(rng), u(rng)});
      for (double t : {0.05, 0.5}) {
        const double d = lattice_heat_trace(g, t), p = lattice_heat_trace_poisson(g, t);
        worst = std::max(worst, std::fabs(d - p) / p);
      }
    }
    ok = worst <= 1e-9;
    return "max relative difference " + format_g17(worst);
  }));

  out.push_back(detail::run_check("hexagonal theta: large-t limit 2/sqrt(3)", [&](bool& ok) {
    const double d = std::fabs(hex_theta(10.0) - 2.0 / std::sqrt(3.0));
    ok = d <= 1e-6;
    return "|theta(10) - 2/sqrt(3)| = " + format_g17(d);
  }));

  out.push_back(detail::run_check("bessel: first zeros of J_0 and J_{-1/2}", [&](bool& ok) {
    const double d0 = std::fabs(bessel_first_zero(0.0) - 2.404825557695773);
    const double dh = std::fabs(bessel_first_zero(-0.5) - pi / 2);
    ok = d0 <= 1e-12 && dh <= 1e-12;
    return "errors " + format_g17(d0) + ", " + format_g17(dh);
  }));

  out.push_back(detail::run_check("phase-space bound with V = 0 equals kroger", [&](bool& ok) {
    const ProblemSpec p(Domain::box({1.0, 1.0}));
    const PhaseSpaceData d = phase_space_tables(p, {1.0, 20.0, 80.0}, QuadratureGrid::uniform(p.domain, 32));
    double worst = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) {
      const double a = phase_space_sum_bound(d, sq, k).bound, b = kroger_avg_bound(square, sq, k).bound;
      worst = std::max(worst, std::fabs(a - b) / b);
    }
    ok = worst <= 1e-10;
    return "max relative difference " + format_g17(worst);
  }));
  return out;
}

}  // namespace spectral_bounds
