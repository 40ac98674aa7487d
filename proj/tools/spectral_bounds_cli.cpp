// spectral-bounds: run scenarios, compute spectra, evaluate single bounds and
// run the invariant self-tests.
//
// Exit status: 0 all inequalities hold; 1 a bound failed or could not be
// evaluated; 2 invalid input.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral_bounds/io.hpp"
#include "spectral_bounds/run.hpp"
#include "spectral_bounds/scenario.hpp"
#include "spectral_bounds/selftest.hpp"

namespace sb = spectral_bounds;
using nlohmann::json;

namespace {

// Scenario fields reachable from flags; unset flags leave the field absent.
struct ScenarioFlags {
  std::string config;
  std::string domain;
  std::string lengths, offset, center, e1, e2, inside;
  std::optional<double> radius;
  std::optional<int> dim;
  std::string w, rho, V;
  std::optional<int> grid;
  std::string source, method;
  std::optional<int> k;
  std::optional<double> cutoff;
  std::string manifold, manifold_e1, manifold_e2;
  std::optional<int> manifold_dim;
  std::optional<double> vol_ratio;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "Base scenario file; flags override its fields");
    app->add_option("--domain", domain, "box | disk | masked_box | torus | sphere");
    app->add_option("--lengths", lengths, "Box side lengths, comma separated");
    app->add_option("--offset", offset, "Box offset, comma separated");
    app->add_option("--radius", radius, "Disk radius");
    app->add_option("--center", center, "Disk center, comma separated");
    app->add_option("--inside", inside, "Masked box: region where this expression is >= 0");
    app->add_option("--e1", e1, "Torus lattice vector e1, comma separated");
    app->add_option("--e2", e2, "Torus lattice vector e2, comma separated");
    app->add_option("--dim", dim, "Sphere dimension");
    app->add_option("--w", w, "Weight field w");
    app->add_option("--rho", rho, "Density exponent field rho");
    app->add_option("--V", V, "Potential field V");
    app->add_option("--grid", grid, "Grid nodes per axis");
    app->add_option("--source", source, "fd | exact-rectangle | exact-torus | exact-sphere");
    app->add_option("--k", k, "Number of eigenvalues");
    app->add_option("--cutoff", cutoff, "Minimum spectral cutoff for exact sources");
    app->add_option("--method", method, "automatic | dense | iterative");
    app->add_option("--manifold", manifold, "Comparison manifold: torus | sphere");
    app->add_option("--manifold-e1", manifold_e1, "Comparison torus e1");
    app->add_option("--manifold-e2", manifold_e2, "Comparison torus e2");
    app->add_option("--manifold-dim", manifold_dim, "Comparison sphere dimension");
    app->add_option("--vol-ratio", vol_ratio, "|Omega|/|M| override");
    app->add_option("--seed", seed, "Seed for randomised checks");
  }

  static json numbers(const std::string& csv) {
    json a = json::array();
    std::stringstream ss(csv);
    for (std::string item; std::getline(ss, item, ',');) a.push_back(std::stod(item));
    return a;
  }

  json build() const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw sb::InvalidInput("cannot open scenario file '" + config + "'");
      j = json::parse(in);
    }
    if (!domain.empty()) j["domain"] = {{"type", domain}};
    auto& d = j["domain"];
    if (!lengths.empty()) d["lengths"] = numbers(lengths);
    if (!offset.empty()) d["offset"] = numbers(offset);
    if (radius) d["radius"] = *radius;
    if (!center.empty()) d["center"] = numbers(center);
    if (!inside.empty()) d["inside"] = inside;
    if (!e1.empty()) d["e1"] = numbers(e1);
    if (!e2.empty()) d["e2"] = numbers(e2);
    if (dim) d["dim"] = *dim;
    if (!w.empty()) j["fields"]["w"] = w;
    if (!rho.empty()) j["fields"]["rho"] = rho;
    if (!V.empty()) j["fields"]["V"] = V;
    if (grid) j["grid"] = {{"n", *grid}};
    if (!source.empty()) j["spectrum"]["source"] = source;
    if (k) j["spectrum"]["k"] = *k;
    if (cutoff) j["spectrum"]["cutoff"] = *cutoff;
    if (!method.empty()) j["spectrum"]["method"] = method;
    if (!manifold.empty()) j["manifold"]["type"] = manifold;
    if (!manifold_e1.empty()) j["manifold"]["e1"] = numbers(manifold_e1);
    if (!manifold_e2.empty()) j["manifold"]["e2"] = numbers(manifold_e2);
    if (manifold_dim) j["manifold"]["dim"] = *manifold_dim;
    if (vol_ratio) j["manifold"]["vol_ratio"] = *vol_ratio;
    if (seed) j["seed"] = *seed;
    return j;
  }
};

/// "1,2,5" → [1,2,5]; "a:b" → {from, to}; "a:b:n" → {from, to, count}; "b" may be "cutoff".
json parse_values(const std::string& spec) {
  if (spec.find(':') == std::string::npos) return ScenarioFlags::numbers(spec);
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) throw sb::InvalidInput("--values: expected from:to or from:to:count");
  json r;
  r["from"] = std::stod(parts[0]);
  if (parts[1] == "cutoff") r["to"] = "cutoff";
  else r["to"] = std::stod(parts[1]);
  if (parts.size() == 3) r["count"] = std::stoi(parts[2]);
  return r;
}

int report_exit(const sb::RunReport& r) {
  if (r.success()) return 0;
  for (const auto& b : r.reports)
    if (!b.holds) std::cerr << "FAIL " << b.kind << " at " << sb::format_g17(b.parameter) << ": bound " << sb::format_g17(b.bound)
                            << ", computed " << sb::format_g17(b.computed) << "\n";
  for (const auto& e : r.errors) std::cerr << "ERROR " << e.kind << " at " << sb::format_g17(e.parameter) << ": " << e.message << "\n";
  if (!r.spectrum.residuals_ok) std::cerr << "ERROR solver residual " << r.spectrum.max_residual << " above tolerance\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue bounds for weighted Neumann problems: spectra, bounds and scenario reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sb::kToolVersion);

  // run
  std::string run_config, run_out, run_format = "both";
  int jobs = sb::default_jobs();
  bool timings = false;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Run a scenario file and write its reports");
  run->add_option("--config", run_config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--format", run_format, "json | csv | both")->check(CLI::IsMember({"json", "csv", "both"}));
  run->add_option("--jobs", jobs, "Worker threads (default: SPECTRAL_BOUNDS_JOBS or 1)")->check(CLI::PositiveNumber);
  run->add_flag("--timings", timings, "Include wall time in the JSON report");
  run->add_option("--seed", run_seed, "Override the scenario seed");

  // spectrum
  ScenarioFlags spec_flags;
  std::string spec_format = "json", spec_out;
  auto* spectrum = app.add_subcommand("spectrum", "Solve or enumerate a spectrum and print it");
  spec_flags.add_to(spectrum);
  spectrum->add_option("--format", spec_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  spectrum->add_option("--out", spec_out, "Write to this file instead of stdout");

  // bound
  ScenarioFlags bound_flags;
  std::string kind, values, correction;
  std::optional<double> H, lip_override, bessel_order;
  std::optional<int> count, n;
  auto* bound = app.add_subcommand("bound", "Evaluate one bound kind on a parameter grid and print the report");
  bound_flags.add_to(bound);
  bound->add_option("--kind", kind, "Bound kind, e.g. kroger_avg, riesz_lower, heat_torus")->required();
  bound->add_option("--values", values, "Parameter values: 1,2,5 or from:to or from:to:count");
  bound->add_option("--H", H, "H_Omega for general_sum");
  bound->add_option("--count", count, "avp_riesz: number of random instances");
  bound->add_option("--n", n, "avp_*: matrix size");
  bound->add_option("--correction", correction, "phase_space_sum: optimized | display");
  bound->add_option("--lip-override", lip_override, "phase_space_sum: Lipschitz constant");
  bound->add_option("--bessel-order", bessel_order, "phase_space_sum: Bessel order");

  // selftest
  std::uint64_t self_seed = 1;
  auto* selftest = app.add_subcommand("selftest", "Run the invariant suites");
  selftest->add_option("--seed", self_seed, "Seed for the randomised suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      sb::Scenario s = sb::load_scenario(run_config);
      if (run_seed) s.seed = *run_seed;
      const sb::RunReport r = sb::run_scenario(s, jobs);
      sb::EmitOptions o;
      o.json = run_format != "csv";
      o.csv = run_format != "json";
      o.timings = timings;
      for (const auto& p : sb::emit(r, run_out, s.json_name, s.csv_name, o)) std::cout << p.string() << "\n";
      std::cout << r.reports.size() << " reports, " << r.errors.size() << " errors: " << (r.success() ? "all hold" : "FAILED")
                << "\n";
      return report_exit(r);
    }
    if (*spectrum) {
      json j = spec_flags.build();
      j.erase("bounds");
      const sb::Scenario s = sb::scenario_from_json(j);
      sb::SpectrumSummary summary;
      const sb::Spectrum mu = sb::detail::compute_spectrum(s, summary);
      const std::string text = spec_format == "csv" ? sb::spectrum_csv(mu) : sb::to_json(mu).dump(2) + "\n";
      if (spec_out.empty()) std::cout << text;
      else sb::detail::write_file(spec_out, text);
      return summary.residuals_ok ? 0 : 1;
    }
    if (*bound) {
      json j = bound_flags.build();
      json req = {{"kind", kind}};
      const sb::ParamKind pk = sb::param_kind_of(kind == "individual_pos" ? "individual_pos_max" : kind);
      if (pk != sb::ParamKind::none) {
        if (values.empty()) throw sb::InvalidInput("--values is required for " + kind);
        req[sb::param_name(pk)] = parse_values(values);
      }
      if (H) req["H"] = *H;
      if (count) req["count"] = *count;
      if (n) req["n"] = *n;
      if (!correction.empty()) j["phase_space"]["correction"] = correction;
      if (lip_override) j["phase_space"]["lip_override"] = *lip_override;
      if (bessel_order) j["phase_space"]["bessel_order"] = *bessel_order;
      j["bounds"] = json::array({req});
      const sb::Scenario s = sb::scenario_from_json(j);
      const sb::RunReport r = sb::run_scenario(s, sb::default_jobs());
      std::cout << sb::to_json(r).dump(2) << "\n";
      return report_exit(r);
    }
    if (*selftest) {
      bool all = true;
      for (const sb::CheckResult& c : sb::run_selftest(self_seed)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " — " << c.detail << "\n";
        all = all && c.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const sb::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
