#pragma once

// Scenario execution: obtain the spectrum once, evaluate every requested
// bound (optionally on several threads), and collect the verdicts in a
// deterministic order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "spectral_bounds/avp.hpp"
#include "spectral_bounds/bounds.hpp"
#include "spectral_bounds/fd_solver.hpp"
#include "spectral_bounds/homogeneous.hpp"
#include "spectral_bounds/phase_space.hpp"
#include "spectral_bounds/scenario.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

inline constexpr const char* kToolVersion = "1.0.0";

struct SpectrumSummary {
  std::string source;
  std::size_t count = 0;
  double cutoff = 0.0;
  std::vector<double> first_values;  // up to 12
  double max_residual = 0.0;         // relative; 0 for exact spectra
  bool residuals_ok = true;
  std::string note;
};

struct BoundError {
  std::string kind;
  double parameter = 0.0;
  std::string message;
};

struct RunReport {
  std::string name;
  std::string scenario_digest;
  std::string version = kToolVersion;
  std::uint64_t seed = 0;
  SpectrumSummary spectrum;
  std::vector<BoundReport> reports;
  std::vector<BoundError> errors;
  double wall_time = 0.0;  // seconds; emitted only on request

  bool success() const {
    if (!errors.empty() || !spectrum.residuals_ok) return false;
    return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.holds; });
  }
};

namespace detail {

/// Eigenvalue level the μ-side spectrum must reach so that every requested
/// z is covered and heat traces are truncated where e^{−μt} < e^{−60}.
inline double target_cutoff(const Scenario& s, double shift) {
  double T = s.cutoff.value_or(0.0);
  for (const BoundRequest& r : s.bounds) {
    const bool mu_side_z = r.kind == "riesz_lower" || r.kind == "homog_riesz";
    const bool heat = r.kind == "heat_lower" || r.kind == "heat_homog" || r.kind == "heat_torus";
    if (mu_side_z)
      if (const auto m = r.range.known_max()) T = std::max(T, *m);
    if (heat)
      if (const auto m = r.range.known_min()) T = std::max(T, shift + 60.0 / *m);
  }
  return T;
}

/// Number of values the μ-side spectrum must list.
inline std::size_t target_count(const Scenario& s) {
  std::size_t n = s.k;
  for (const BoundRequest& r : s.bounds)
    if (r.kind == "homog_sum") n = std::max(n, static_cast<std::size_t>(std::ceil(*r.range.known_max())) + 1);
  return n;
}

inline Spectrum affine_map(const Spectrum& raw, double w, double V, const std::string& source) {
  std::vector<double> v = raw.values;
  for (double& x : v) x = w * x + V;
  return Spectrum(std::move(v), w * raw.cutoff + V, source);
}

/// Exact spectrum of a homogeneous model reaching both `level` and `count`.
inline HomogeneousSpectrum model_spectrum(const ManifoldSpec& m, double level, std::size_t count) {
  if (m.sphere) {
    int l = 1;
    auto make = [&] { return sphere_spectrum(m.dim, l); };
    HomogeneousSpectrum h = make();
    while (h.cutoff < level || static_cast<std::size_t>(h.count_upto(h.cutoff)) < count + 1) {
      l *= 2;
      h = make();
    }
    return h;
  }
  double c = std::max(level, 4.0 * std::numbers::pi * std::numbers::pi);
  HomogeneousSpectrum h = torus_spectrum(m.lattice, c);
  while (static_cast<std::size_t>(h.count_upto(c)) < count + 1) {
    c *= 2.0;
    h = torus_spectrum(m.lattice, c);
  }
  return h;
}

inline Spectrum compute_spectrum(const Scenario& s, SpectrumSummary& sum) {
  sum.source = to_string(s.source);
  const double w = s.w.constant_value().value_or(1.0);
  const double V = s.V.constant_value().value_or(0.0);
  if (s.source == SpectrumSource::fd) {
    const ProblemSpec& p = *s.problem;
    SolverOptions o;
    o.k = s.k;
    o.method = s.method;
    o.tolerance = s.tolerance;
    Spectrum mu = solve_problem(p, QuadratureGrid(p.domain, s.grid), o);
    for (std::size_t i = 0; i < mu.residuals.size(); ++i) {
      const double rel = mu.residuals[i] / std::max(1.0, std::fabs(mu.values[i]));
      sum.max_residual = std::max(sum.max_residual, rel);
    }
    sum.residuals_ok = sum.max_residual <= 10.0 * s.tolerance;
    std::string dims;
    for (int n : s.grid) dims += (dims.empty() ? "" : "x") + std::to_string(n);
    sum.note = "finite differences on a " + dims + " grid, O(h^2)";
    if (s.convergence_check) {
      std::vector<int> coarse;
      for (int n : s.grid) coarse.push_back(std::max(2, n / 2));
      o.method = SolverMethod::automatic;
      const Spectrum c = solve_problem(p, QuadratureGrid(p.domain, coarse), o);
      double change = 0.0;
      for (std::size_t i = 0; i < std::min<std::size_t>(6, std::min(c.size(), mu.size())); ++i)
        if (std::fabs(mu.values[i]) > 1e-8) change = std::max(change, std::fabs(c.values[i] - mu.values[i]) / std::fabs(mu.values[i]));
      sum.note += "; max relative change vs half grid " + format_g17(change);
    }
    return mu;
  }
  const double T = target_cutoff(s, V);
  const std::size_t need = target_count(s);
  if (s.source == SpectrumSource::exact_sphere) {
    ManifoldSpec m;
    m.sphere = true;
    m.dim = s.sphere_dim;
    sum.note = "exact spectrum of the unit sphere";
    return flatten(shifted_spectrum(model_spectrum(m, std::max(0.0, (T - V) / w), need), w, V), "exact-sphere");
  }
  double c = std::max(1.0, (T - V) / w);
  auto make = [&]() -> Spectrum {
    if (s.source == SpectrumSource::exact_torus) {
      const auto& t = std::get<TorusDomain>(s.problem->domain.variant());
      return flatten(torus_spectrum(t.lattice, c), "exact-torus");
    }
    return box_neumann_upto(std::get<BoxDomain>(s.problem->domain.variant()).lengths, c);
  };
  Spectrum raw = make();
  while (raw.size() < need + 1) {
    c *= 2.0;
    raw = make();
  }
  sum.note = s.source == SpectrumSource::exact_torus ? "exact periodic spectrum" : "exact Neumann box spectrum";
  return affine_map(raw, w, V, to_string(s.source));
}

struct Outcome {
  std::vector<BoundReport> reports;
  std::vector<BoundError> errors;
};

class Evaluator {
 public:
  Evaluator(const Scenario& s, Spectrum mu) : s_(s), mu_(std::move(mu)) {
    const bool euclid = s.problem.has_value();
    double w_mean = s.w.constant_value().value_or(1.0), vw_mean = s.V.constant_value().value_or(0.0);
    if (euclid) {
      means_ = field_means(*s.problem);
      w_mean = means_.w;
      vw_mean = means_.vw;
    }
    if (s.manifold) {
      const double level = std::max(target_cutoff(s, vw_mean), mu_.cutoff);
      const double model_volume = s.manifold->sphere ? sphere_spectrum(s.manifold->dim, 0).manifold_volume
                                                     : s.manifold->lattice.covolume();
      vol_ratio_ = s.manifold->vol_ratio.value_or(euclid ? means_.volume / model_volume : 1.0);
      std::size_t need = 0;
      for (const BoundRequest& r : s.bounds)
        if (r.kind == "homog_sum") need = std::max(need, static_cast<std::size_t>(std::ceil(*r.range.known_max() / vol_ratio_)) + 1);
      shifted_ = shifted_spectrum(model_spectrum(*s.manifold, std::max(0.0, (level - vw_mean) / w_mean), need),
                                  w_mean, vw_mean);
    }
  }

  /// Independent units of work; phase-space and AVP requests form one task each.
  std::vector<std::function<Outcome()>> tasks() {
    std::vector<std::function<Outcome()>> out;
    for (const BoundRequest& r : s_.bounds) {
      if (r.kind == "avp_riesz") {
        out.push_back([this, &r] { return guarded(r, 0.0, [&] { return avp_random_instances(s_.seed, r.count, r.n); }); });
        continue;
      }
      const std::vector<double> values = r.range.expand(mu_.cutoff);
      if (r.kind == "phase_space_sum") {
        out.push_back([this, &r, values] {
          Outcome o;
          for (double v : values) merge(o, evaluate(r, v));
          return o;
        });
        continue;
      }
      for (double v : values) out.push_back([this, &r, v] { return evaluate(r, v); });
    }
    return out;
  }

  void prepare() {
    for (const BoundRequest& r : s_.bounds)
      if (r.kind == "phase_space_sum" && !psd_) {
        const PhaseSpaceSpec& ps = *s_.phase_space;
        try {
          psd_ = phase_space_tables(*s_.problem, ps.lambda_grid, QuadratureGrid::uniform(s_.problem->domain, ps.grid));
        } catch (const std::exception& e) {
          psd_error_ = e.what();
        }
      }
  }

 private:
  static void merge(Outcome& into, Outcome from) {
    into.reports.insert(into.reports.end(), from.reports.begin(), from.reports.end());
    into.errors.insert(into.errors.end(), from.errors.begin(), from.errors.end());
  }

  template <class F>
  Outcome guarded(const BoundRequest& r, double v, F&& f) const {
    Outcome o;
    try {
      o.reports = f();
    } catch (const std::exception& e) {
      o.errors.push_back({r.kind, v, e.what()});
    }
    return o;
  }

  BoundInputs inputs(double H = 0.0) const { return BoundInputs::from(*s_.problem, means_, H); }

  Outcome evaluate(const BoundRequest& r, double v) const {
    return guarded(r, v, [&]() -> std::vector<BoundReport> {
      const auto k = static_cast<std::size_t>(v);
      const std::string& kd = r.kind;
      if (kd == "kroger_avg") return {kroger_avg_bound(inputs(), mu_, k)};
      if (kd == "general_sum") return {general_sum_bound(inputs(r.H), mu_, k)};
      if (kd == "individual_sk") return {individual_bound_sk(inputs(), mu_, k)};
      if (kd == "individual_pos_implicit") return {individual_bound_pos(inputs(), mu_, k).implicit_form};
      if (kd == "individual_pos_max") return {individual_bound_pos(inputs(), mu_, k).max_form};
      if (kd == "riesz_lower") return {riesz_lower_bound(inputs(), mu_, v)};
      if (kd == "heat_lower") return {heat_lower_bound(inputs(), mu_, v)};
      if (kd == "heat_torus") return {heat_torus_bound(inputs(), mu_, v)};
      if (kd == "homog_riesz") return {homog_riesz_compare(mu_, *shifted_, vol_ratio_, v)};
      if (kd == "homog_sum") return {homog_sum_compare(mu_, *shifted_, vol_ratio_, v)};
      if (kd == "heat_homog") return {heat_homog_compare(mu_, *shifted_, vol_ratio_, v)};
      if (kd == "phase_space_sum") {
        if (!psd_) throw QuadratureError("phase-space tables unavailable: " + psd_error_);
        const std::lock_guard<std::mutex> lock(psd_mutex_);  // the shared integrator is not reentrant
        return {phase_space_sum_bound(*psd_, mu_, k, s_.phase_space->options)};
      }
      if (kd == "avp_frame_mean") {
        std::mt19937_64 rng(s_.seed ^ 0x9e3779b97f4a7c15ull);
        const Eigen::MatrixXd H = random_symmetric(rng, r.n);
        return {tight_frame_mean_check(H, doubled_basis_frame(r.n), k)};
      }
      throw InvalidInput("unhandled bound kind " + kd);
    });
  }

  const Scenario& s_;
  Spectrum mu_;
  FieldMeans means_;
  std::optional<HomogeneousSpectrum> shifted_;
  double vol_ratio_ = 1.0;
  std::optional<PhaseSpaceData> psd_;
  std::string psd_error_;
  mutable std::mutex psd_mutex_;
};

}  // namespace detail

/// Default worker count: SPECTRAL_BOUNDS_JOBS if set and positive, else 1.
inline int default_jobs() {
  if (const char* e = std::getenv("SPECTRAL_BOUNDS_JOBS")) {
    try {
      const int n = std::stoi(e);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

inline RunReport run_scenario(const Scenario& s, int jobs = 1) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.name = s.name;
  rep.scenario_digest = s.digest;
  rep.seed = s.seed;
  const Spectrum mu = detail::compute_spectrum(s, rep.spectrum);
  rep.spectrum.count = mu.size();
  rep.spectrum.cutoff = mu.cutoff;
  rep.spectrum.first_values.assign(mu.values.begin(), mu.values.begin() + static_cast<long>(std::min<std::size_t>(12, mu.size())));

  detail::Evaluator ev(s, mu);
  ev.prepare();
  const auto tasks = ev.tasks();
  std::vector<detail::Outcome> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) results[i] = tasks[i]();
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& o : results) {
    rep.reports.insert(rep.reports.end(), o.reports.begin(), o.reports.end());
    rep.errors.insert(rep.errors.end(), o.errors.begin(), o.errors.end());
  }
  std::stable_sort(rep.reports.begin(), rep.reports.end(), [](const BoundReport& a, const BoundReport& b) {
    return std::tie(a.kind, a.parameter, a.digest) < std::tie(b.kind, b.parameter, b.digest);
  });
  std::stable_sort(rep.errors.begin(), rep.errors.end(), [](const BoundError& a, const BoundError& b) {
    return std::tie(a.kind, a.parameter, a.message) < std::tie(b.kind, b.parameter, b.message);
  });
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace spectral_bounds
