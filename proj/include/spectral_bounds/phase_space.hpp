#pragma once

// Phase-space volumes Φ_1, Φ_w and energy E_w of {|p|² + Ṽ(x) <= Λ}, the
// inverse Λ(k) of Φ_1, sampled Lipschitz constants of Ṽ, and the coherent-state
// upper bound on eigenvalue sums built from them.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/problem.hpp"
#include "spectral_bounds/report.hpp"
#include "spectral_bounds/special_functions.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

enum class PhaseSpaceQuantity { phi_1, phi_w, energy_w };

namespace detail {

/// Integrates powers of (Λ − Ṽ)_+ over Ω. The domain frame is mapped to
/// [0,1]^ν and integrated axis by axis; on each axis the positivity set is
/// located by a scan plus bisection, and each positive piece is integrated
/// with tanh-sinh, which tolerates the (edge distance)^α behaviour there.
class PhaseSpaceIntegrator {
 public:
  explicit PhaseSpaceIntegrator(const ProblemSpec& p)
      : domain_(p.domain), nu_(p.nu), vt_(effective_potential(p)), w_(p.w),
        origin_(p.domain.frame_origin()), quad_(12) {
    for (int a = 0; a < nu_; ++a) edges_.push_back(p.domain.frame_edge(a));
    jacobian_ = std::fabs(frame_det());
    scan_ = nu_ <= 2 ? 256 : 24;
    prefactor_ = unit_ball_volume(nu_) / std::pow(2.0 * std::numbers::pi, nu_);
  }

  int dimension() const { return nu_; }

  double operator()(PhaseSpaceQuantity q, double lambda) const {
    std::vector<double> s(nu_, 0.5);
    const double raw = integrate_level(nu_ - 1, s, q, lambda);
    const double c = q == PhaseSpaceQuantity::energy_w ? nu_ / (nu_ + 2.0) : 1.0;
    return c * prefactor_ * jacobian_ * raw;
  }

 private:
  double frame_det() const {
    if (nu_ == 1) return edges_[0][0];
    if (nu_ == 2) return edges_[0][0] * edges_[1][1] - edges_[1][0] * edges_[0][1];
    double d = 1.0;
    for (int a = 0; a < nu_; ++a) d *= edges_[a][a];
    return d;
  }

  void to_physical(const std::vector<double>& s, std::vector<double>& x) const {
    x.assign(origin_.begin(), origin_.end());
    for (int a = 0; a < nu_; ++a)
      for (int d = 0; d < nu_; ++d) x[d] += s[a] * edges_[a][d];
  }

  /// Λ − Ṽ(x) at an interior point, or −1 outside Ω.
  double margin(const std::vector<double>& s, double lambda) const {
    thread_local std::vector<double> x;
    to_physical(s, x);
    if (!domain_.contains(x)) return -1.0;
    return lambda - vt_(x);
  }

  double integrand(const std::vector<double>& s, PhaseSpaceQuantity q, double lambda) const {
    thread_local std::vector<double> x;
    to_physical(s, x);
    if (!domain_.contains(x)) return 0.0;
    const double m = lambda - vt_(x);
    if (!(m > 0.0)) return 0.0;
    switch (q) {
      case PhaseSpaceQuantity::phi_1: return std::pow(m, 0.5 * nu_);
      case PhaseSpaceQuantity::phi_w: return std::pow(m, 0.5 * nu_) * w_(x);
      case PhaseSpaceQuantity::energy_w: return std::pow(m, 1.0 + 0.5 * nu_) * w_(x);
    }
    return 0.0;
  }

  /// Maximiser of Λ − Ṽ along axis 0 near the best scan sample, by golden
  /// section; returns it only if the margin there is positive. This catches
  /// positive caps thinner than the scan spacing.
  std::optional<double> refine_inner(std::vector<double>& s, double lambda, int best_j) const {
    const double keep = s[0];
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(0.0, (best_j - 1.0) / (scan_ - 1.0));
    double b = std::min(1.0, (best_j + 1.0) / (scan_ - 1.0));
    auto m_at = [&](double t) {
      s[0] = t;
      return margin(s, lambda);
    };
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = m_at(c), fd = m_at(d);
    std::optional<double> found;
    for (int it = 0; it < 60; ++it) {
      if (fc > 0.0) found = c;
      else if (fd > 0.0) found = d;
      if (found) break;
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = m_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = m_at(d);
      }
    }
    s[0] = keep;
    return found;
  }

  /// Scan along axis 0: index of the first positive sample, or −1 with the
  /// index of the largest margin in `best_j`.
  int scan_inner(std::vector<double>& s, double lambda, int& best_j) const {
    const double keep = s[0];
    double best = -INFINITY;
    int hit = -1;
    for (int j = 0; j < scan_; ++j) {
      s[0] = j / (scan_ - 1.0);
      const double m = margin(s, lambda);
      if (m > 0.0) {
        hit = j;
        break;
      }
      if (m > best) {
        best = m;
        best_j = j;
      }
    }
    s[0] = keep;
    return hit;
  }

  /// Whether the slice with s[0..level] free contains a positive point.
  bool positive(int level, std::vector<double>& s, double lambda) const {
    if (level < 0) return margin(s, lambda) > 0.0;
    if (level == 0) {
      int best_j = 0;
      if (scan_inner(s, lambda, best_j) >= 0) return true;
      return refine_inner(s, lambda, best_j).has_value();
    }
    const double keep = s[level];
    bool any = false;
    for (int j = 0; j < scan_ && !any; ++j) {
      s[level] = j / (scan_ - 1.0);
      any = positive(level - 1, s, lambda);
    }
    s[level] = keep;
    return any;
  }

  /// Maximal intervals of s[level] on which the lower slice is positive.
  std::vector<std::pair<double, double>> pieces(int level, std::vector<double>& s, double lambda) const {
    const double keep = s[level];
    auto pos = [&](double t) {
      s[level] = t;
      return positive(level - 1, s, lambda);
    };
    auto edge = [&](double a, double b, bool a_positive) {
      for (int it = 0; it < 60 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        if (pos(m) == a_positive) a = m;
        else b = m;
      }
      return a_positive ? a : b;
    };
    std::vector<std::pair<double, double>> out;
    double prev_t = 0.0;
    bool prev = pos(0.0);
    double start = 0.0;
    for (int j = 1; j < scan_; ++j) {
      const double t = j / (scan_ - 1.0);
      const bool cur = pos(t);
      if (cur && !prev) start = edge(prev_t, t, false);
      if (!cur && prev) out.emplace_back(start, edge(prev_t, t, true));
      prev = cur;
      prev_t = t;
    }
    if (prev) out.emplace_back(start, 1.0);
    if (out.empty() && level == 0) {
      int best_j = 0;
      scan_inner(s, lambda, best_j);
      if (const auto t = refine_inner(s, lambda, best_j)) {
        const double lo = std::max(0.0, (best_j - 1.0) / (scan_ - 1.0));
        const double hi = std::min(1.0, (best_j + 1.0) / (scan_ - 1.0));
        out.emplace_back(edge(lo, *t, false), edge(*t, hi, true));
      }
    }
    s[level] = keep;
    return out;
  }

  double integrate_level(int level, std::vector<double>& s, PhaseSpaceQuantity q, double lambda) const {
    double total = 0.0;
    for (const auto& [a, b] : pieces(level, s, lambda)) {
      if (!(b > a)) continue;
      auto f = [&](double t) {
        std::vector<double> local = s;
        local[level] = t;
        return level == 0 ? integrand(local, q, lambda) : integrate_level(level - 1, local, q, lambda);
      };
      double err = 0.0;
      const double v = quad_.integrate(f, a, b, 1e-12, &err);
      if (!std::isfinite(v)) throw QuadratureError("phase-space integral is not finite");
      total += v;
    }
    return total;
  }

  Domain domain_;
  int nu_;
  Expr vt_;
  Expr w_;
  std::vector<double> origin_;
  std::vector<std::vector<double>> edges_;
  double jacobian_ = 1.0;
  double prefactor_ = 1.0;
  int scan_ = 256;
  // Boost's integrate() is not const-qualified; calls do not alter results.
  mutable boost::math::quadrature::tanh_sinh<double> quad_;
};

/// Ṽ and |∇Ṽ| at the inside nodes of a grid, sorted by Ṽ, with the running
/// maximum of |∇Ṽ| so that Lip(Λ) is a binary search.
struct SampledPotential {
  std::vector<double> values;
  std::vector<double> running_lip;

  SampledPotential(const ProblemSpec& p, const QuadratureGrid& grid) {
    const Expr vt = effective_potential(p);
    const std::vector<Expr> g = gradient(vt, p.nu);
    std::vector<std::pair<double, double>> rows;
    std::vector<double> x(p.nu);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.inside(i)) continue;
      grid.node(i, x);
      double n2 = 0.0;
      for (const Expr& d : g) {
        const double v = d(x);
        n2 += v * v;
      }
      rows.emplace_back(vt(x), std::sqrt(n2));
    }
    std::sort(rows.begin(), rows.end());
    double run = 0.0;
    for (const auto& [v, l] : rows) {
      run = std::max(run, l);
      values.push_back(v);
      running_lip.push_back(run);
    }
  }

  double min() const { return values.front(); }

  double lip(double lambda) const {
    const auto it = std::upper_bound(values.begin(), values.end(), lambda);
    if (it == values.begin()) return 0.0;
    return running_lip[static_cast<std::size_t>(it - values.begin()) - 1];
  }
};

}  // namespace detail

/// Tabulated phase-space quantities. The integrator is kept so that Λ(k) and
/// the bound can refine between nodes and extend past the last one.
struct PhaseSpaceData {
  int nu = 2;
  std::vector<double> lambda;
  std::vector<double> phi_1;
  std::vector<double> phi_w;
  std::vector<double> energy_w;
  std::vector<double> lip;
  double min_potential = 0.0;  // min of Ṽ over the grid nodes
  std::string digest;

  std::shared_ptr<const detail::PhaseSpaceIntegrator> integrator;
  std::shared_ptr<const detail::SampledPotential> sampled;

  double evaluate(PhaseSpaceQuantity q, double L) const { return (*integrator)(q, L); }
  double lip_at(double L) const { return sampled->lip(L); }
};

/// sup |∇Ṽ| over inside grid nodes with Ṽ <= Λ; 0 if there are none.
inline double lip_constant(const ProblemSpec& p, double lambda, const QuadratureGrid& grid) {
  return detail::SampledPotential(p, grid).lip(lambda);
}

inline std::string problem_digest(const ProblemSpec& p, const QuadratureGrid& grid) {
  std::string key = p.domain.type_name();
  for (int a = 0; a < p.nu; ++a) {
    for (double v : p.domain.frame_edge(a)) key += "|" + format_g17(v);
    key += "|" + std::to_string(grid.counts()[a]);
  }
  for (double v : p.domain.frame_origin()) key += "|" + format_g17(v);
  key += "|" + p.w.str() + "|" + p.rho.str() + "|" + p.V.str();
  return fnv1a_hex(key);
}

/// Tabulates Φ_1, Φ_w, E_w and Lip on an increasing Λ grid and checks that
/// Φ_1, Φ_w are non-decreasing and E_w is convex.
inline PhaseSpaceData phase_space_tables(const ProblemSpec& p, std::vector<double> lambda_grid,
                                         const QuadratureGrid& grid) {
  if (lambda_grid.empty()) throw InvalidInput("phase_space_tables: empty Lambda grid");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > lambda_grid[i - 1]))
      throw InvalidInput("phase_space_tables: Lambda grid must be strictly increasing");
  PhaseSpaceData d;
  d.nu = p.nu;
  d.integrator = std::make_shared<detail::PhaseSpaceIntegrator>(p);
  d.sampled = std::make_shared<detail::SampledPotential>(p, grid);
  d.min_potential = d.sampled->min();
  d.digest = problem_digest(p, grid);
  d.lambda = std::move(lambda_grid);
  for (double L : d.lambda) {
    d.phi_1.push_back(d.evaluate(PhaseSpaceQuantity::phi_1, L));
    d.phi_w.push_back(d.evaluate(PhaseSpaceQuantity::phi_w, L));
    d.energy_w.push_back(d.evaluate(PhaseSpaceQuantity::energy_w, L));
    d.lip.push_back(d.lip_at(L));
  }
  for (std::size_t i = 1; i < d.lambda.size(); ++i) {
    for (const auto* t : {&d.phi_1, &d.phi_w})
      if ((*t)[i] < (*t)[i - 1] - 1e-12 * (1.0 + std::fabs((*t)[i - 1])))
        throw QuadratureError("phase-space volume decreased between table nodes");
    if (i >= 2) {
      const double s0 = (d.energy_w[i - 1] - d.energy_w[i - 2]) / (d.lambda[i - 1] - d.lambda[i - 2]);
      const double s1 = (d.energy_w[i] - d.energy_w[i - 1]) / (d.lambda[i] - d.lambda[i - 1]);
      if (s1 < s0 - 1e-9 * (1.0 + std::fabs(s0)))
        throw QuadratureError("phase-space energy is not convex on the table");
    }
  }
  return d;
}

/// Minimal Λ with Φ_1(Λ) >= k, by bisection between table nodes with direct
/// quadrature. The upper end is returned, so Φ_1(Λ) >= k. With `extend`, Λ
/// may lie beyond the last table node; otherwise that is an error.
inline double lambda_of_k(const PhaseSpaceData& d, double k, bool extend = false) {
  if (!(k > 0.0)) throw InvalidInput("lambda_of_k: k must be positive");
  const auto phi = [&](double L) { return d.evaluate(PhaseSpaceQuantity::phi_1, L); };
  double lo, hi;
  const auto it = std::find_if(d.phi_1.begin(), d.phi_1.end(), [&](double v) { return v >= k; });
  if (it != d.phi_1.end()) {
    const std::size_t i = static_cast<std::size_t>(it - d.phi_1.begin());
    hi = d.lambda[i];
    lo = i > 0 ? d.lambda[i - 1] : std::min(d.lambda[0], d.min_potential) - 1.0;
  } else {
    if (!extend) throw QuadratureError("lambda_of_k: Phi_1 does not reach k on the tabulated range");
    lo = d.lambda.back();
    double span = std::max(1.0, std::fabs(lo));
    hi = lo + span;
    for (int i = 0; phi(hi) < k; ++i) {
      if (i > 80) throw QuadratureError("lambda_of_k: Phi_1 does not reach k");
      lo = hi;
      span *= 2.0;
      hi = lo + span;
    }
  }
  for (int i = 0; phi(lo) >= k; ++i) {
    if (i > 80) throw QuadratureError("lambda_of_k: no lower bracket");
    lo -= std::max(1.0, std::fabs(lo));
  }
  while (hi - lo > 1e-14 * std::max(1.0, std::fabs(hi))) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    if (phi(m) >= k) hi = m;
    else lo = m;
  }
  return hi;
}

/// How the Lipschitz correction is written. `optimized` minimises
/// j²/r² + Lr over the coherent-state radius r, giving
/// (3/2)c Φ_w(Λ + c) with c = (2j²L²)^{1/3}. `display` uses the closed form
/// 3(2j²L)^{1/3} Φ_w(Λ + (2j²L)^{1/3}), which is not scale-consistent and is
/// kept for comparison.
enum class PhaseSpaceCorrection { optimized, display };

struct PhaseSpaceBoundOptions {
  PhaseSpaceCorrection correction = PhaseSpaceCorrection::optimized;
  std::optional<double> bessel_order;  // default ν/2 − 1
  std::optional<double> lip_override;  // replaces the sampled Lip(Λ(k))
};

struct PhaseSpaceBoundTerms {
  double lambda = 0.0;
  double lip = 0.0;
  double bessel_zero = 0.0;
  double energy = 0.0;      // E_w(Λ(k))
  double correction = 0.0;  // Lipschitz term, 0 when Lip = 0
  double total() const { return energy + correction; }
};

inline PhaseSpaceBoundTerms phase_space_terms(const PhaseSpaceData& d, double k,
                                              const PhaseSpaceBoundOptions& opts = {}) {
  PhaseSpaceBoundTerms t;
  t.lambda = lambda_of_k(d, k, true);
  t.lip = opts.lip_override ? *opts.lip_override : d.lip_at(t.lambda);
  if (t.lip < 0.0) throw InvalidInput("phase-space bound: Lipschitz constant must be >= 0");
  t.bessel_zero = bessel_first_zero(opts.bessel_order ? *opts.bessel_order : 0.5 * d.nu - 1.0);
  t.energy = d.evaluate(PhaseSpaceQuantity::energy_w, t.lambda);
  if (t.lip > 0.0) {
    const double j2 = t.bessel_zero * t.bessel_zero;
    if (opts.correction == PhaseSpaceCorrection::optimized) {
      const double c = std::cbrt(2.0 * j2 * t.lip * t.lip);
      t.correction = 1.5 * c * d.evaluate(PhaseSpaceQuantity::phi_w, t.lambda + c);
    } else {
      const double c = std::cbrt(2.0 * j2 * t.lip);
      t.correction = 3.0 * c * d.evaluate(PhaseSpaceQuantity::phi_w, t.lambda + c);
    }
  }
  return t;
}

/// Σ_{j<k} μ_j <= E_w(Λ(k)) + Lipschitz correction.
inline BoundReport phase_space_sum_bound(const PhaseSpaceData& d, const Spectrum& s, std::size_t k,
                                         const PhaseSpaceBoundOptions& opts = {}) {
  if (k < 1) throw InvalidInput("phase_space_sum_bound: k must be >= 1");
  if (s.size() < k) throw InsufficientSpectrum("phase_space_sum_bound: spectrum shorter than k");
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) sum += s.values[j];
  const PhaseSpaceBoundTerms t = phase_space_terms(d, static_cast<double>(k), opts);
  std::string notes = "Lambda=" + format_g17(t.lambda) + "; Lambda(k) is the least Lambda with Phi_1 >= k";
  notes += "; Lip=" + format_g17(t.lip) +
           (opts.lip_override ? " (user override)" : " (grid-sampled, possible underestimate)");
  notes += "; bessel_order=" + format_g17(opts.bessel_order ? *opts.bessel_order : 0.5 * d.nu - 1.0);
  notes += "; correction=";
  notes += opts.correction == PhaseSpaceCorrection::optimized ? "optimized" : "display";
  notes += "; energy=" + format_g17(t.energy) + "; lipschitz_term=" + format_g17(t.correction);
  return make_report("phase_space_sum", static_cast<double>(k), t.total(), sum, Direction::upper,
                     std::move(notes));
}

}  // namespace spectral_bounds
