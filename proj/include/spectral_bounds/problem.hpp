#pragma once

// The weighted quadratic form: domain Ω plus the fields w, ρ, V.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "spectral_bounds/domain.hpp"
#include "spectral_bounds/error.hpp"
#include "spectral_bounds/expr.hpp"

namespace spectral_bounds {

struct ProblemSpec {
  Domain domain;
  int nu = 0;
  Expr w = Expr::constant(1.0);
  Expr rho = Expr::constant(0.0);
  Expr V = Expr::constant(0.0);
  std::string label;

  ProblemSpec(Domain d, Expr w_ = Expr::constant(1.0), Expr rho_ = Expr::constant(0.0),
              Expr V_ = Expr::constant(0.0), std::string label_ = {})
      : domain(std::move(d)), nu(domain.dimension()), w(std::move(w_)), rho(std::move(rho_)),
        V(std::move(V_)), label(std::move(label_)) {}

  /// Checks dimensions and that w > 0 on a 64-per-axis sample of Ω.
  void validate() const {
    if (nu != domain.dimension()) throw InvalidInput("problem dimension does not match domain");
    for (const Expr* f : {&w, &rho, &V})
      if (f->max_variable() >= nu)
        throw InvalidInput("field '" + f->str() + "' references a coordinate beyond dimension " +
                           std::to_string(nu));
    const int n = nu <= 2 ? 64 : 16;
    const QuadratureGrid g = QuadratureGrid::uniform(domain, n);
    std::vector<double> x(nu);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.inside(i)) continue;
      g.node(i, x);
      if (!(w(x) > 0.0)) throw InvalidInput("weight w must be strictly positive on the domain");
      (void)rho(x);
      (void)V(x);
    }
  }

  bool is_flat() const {
    auto is = [](const Expr& e, double v) {
      auto c = e.constant_value();
      return c && *c == v;
    };
    return is(w, 1.0) && is(rho, 0.0) && is(V, 0.0);
  }
};

/// Ṽ = V + |∇ρ|².
inline Expr effective_potential(const ProblemSpec& p) {
  Expr out = p.V;
  for (int a = 0; a < p.nu; ++a) {
    const Expr d = differentiate(p.rho, a);
    if (!d.is_zero()) out = out + d * d;
  }
  return out;
}

/// Gradient of a field, one component per axis.
inline std::vector<Expr> gradient(const Expr& f, int nu) {
  std::vector<Expr> g;
  g.reserve(nu);
  for (int a = 0; a < nu; ++a) g.push_back(differentiate(f, a));
  return g;
}

/// The mean values ∮w and ∮Ṽw that enter every bound, on a given grid.
struct FieldMeans {
  double w = 1.0;
  double vw = 0.0;
  double volume = 1.0;
};

inline FieldMeans field_means(const ProblemSpec& p, const QuadratureGrid& grid) {
  const Expr vt = effective_potential(p);
  FieldMeans m;
  m.w = mean_value(p.w, p.domain, grid);
  m.vw = mean_value(vt * p.w, p.domain, grid);
  m.volume = p.domain.volume();
  return m;
}

/// Default quadrature resolution for means: 400 per axis in 2-D.
inline FieldMeans field_means(const ProblemSpec& p) {
  const int n = p.nu == 1 ? 4000 : p.nu == 2 ? 400 : 48;
  return field_means(p, QuadratureGrid::uniform(p.domain, n));
}

}  // namespace spectral_bounds
