#pragma once

// JSON and CSV forms of spectra, bound reports and run reports. Numbers are
// written in shortest round-trip form (JSON) or %.17g (CSV), so output is
// byte-stable for identical inputs.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/report.hpp"
#include "spectral_bounds/run.hpp"
#include "spectral_bounds/spectrum.hpp"

namespace spectral_bounds {

using ojson = nlohmann::ordered_json;

namespace detail {

/// Non-finite values become strings, since JSON has no encoding for them.
inline ojson number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double read_number(const ojson& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_g17(v);
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline ojson to_json(const Spectrum& s) {
  ojson j;
  j["source"] = s.source;
  j["cutoff"] = detail::number(s.cutoff);
  j["values"] = s.values;
  if (!s.residuals.empty()) j["residuals"] = s.residuals;
  return j;
}

inline Spectrum spectrum_from_json(const ojson& j) {
  Spectrum s(j.at("values").get<std::vector<double>>(), detail::read_number(j.at("cutoff")),
             j.at("source").get<std::string>());
  if (j.contains("residuals")) s.residuals = j.at("residuals").get<std::vector<double>>();
  return s;
}

inline std::string spectrum_csv(const Spectrum& s) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) out += std::to_string(i) + "," + format_g17(s.values[i]) + "\n";
  return out;
}

inline ojson to_json(const BoundReport& r) {
  ojson j;
  j["kind"] = r.kind;
  j["parameter"] = detail::number(r.parameter);
  j["bound"] = detail::number(r.bound);
  j["computed"] = detail::number(r.computed);
  j["slack"] = detail::number(r.slack);
  j["holds"] = r.holds;
  j["notes"] = r.notes;
  return j;
}

inline BoundReport bound_report_from_json(const ojson& j) {
  BoundReport r;
  r.kind = j.at("kind").get<std::string>();
  r.parameter = detail::read_number(j.at("parameter"));
  r.bound = detail::read_number(j.at("bound"));
  r.computed = detail::read_number(j.at("computed"));
  r.slack = detail::read_number(j.at("slack"));
  r.holds = j.at("holds").get<bool>();
  r.notes = j.at("notes").get<std::string>();
  return r;
}

inline ojson to_json(const RunReport& r, bool with_timings = false) {
  ojson j;
  j["tool"] = "spectral-bounds";
  j["version"] = r.version;
  j["scenario"] = r.name;
  j["scenario_digest"] = r.scenario_digest;
  j["seed"] = r.seed;
  ojson s;
  s["source"] = r.spectrum.source;
  s["count"] = r.spectrum.count;
  s["cutoff"] = detail::number(r.spectrum.cutoff);
  s["first_values"] = r.spectrum.first_values;
  s["max_residual"] = detail::number(r.spectrum.max_residual);
  s["residuals_ok"] = r.spectrum.residuals_ok;
  s["note"] = r.spectrum.note;
  j["spectrum"] = s;
  j["reports"] = ojson::array();
  for (const BoundReport& b : r.reports) j["reports"].push_back(to_json(b));
  j["errors"] = ojson::array();
  for (const BoundError& e : r.errors)
    j["errors"].push_back({{"kind", e.kind}, {"parameter", detail::number(e.parameter)}, {"message", e.message}});
  j["success"] = r.success();
  if (with_timings) j["wall_time_s"] = r.wall_time;
  return j;
}

inline RunReport run_report_from_json(const ojson& j) {
  RunReport r;
  r.version = j.at("version").get<std::string>();
  r.name = j.at("scenario").get<std::string>();
  r.scenario_digest = j.at("scenario_digest").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const ojson& s = j.at("spectrum");
  r.spectrum.source = s.at("source").get<std::string>();
  r.spectrum.count = s.at("count").get<std::size_t>();
  r.spectrum.cutoff = detail::read_number(s.at("cutoff"));
  r.spectrum.first_values = s.at("first_values").get<std::vector<double>>();
  r.spectrum.max_residual = detail::read_number(s.at("max_residual"));
  r.spectrum.residuals_ok = s.at("residuals_ok").get<bool>();
  r.spectrum.note = s.at("note").get<std::string>();
  for (const ojson& b : j.at("reports")) r.reports.push_back(bound_report_from_json(b));
  for (const ojson& e : j.at("errors"))
    r.errors.push_back({e.at("kind").get<std::string>(), detail::read_number(e.at("parameter")),
                        e.at("message").get<std::string>()});
  if (j.contains("wall_time_s")) r.wall_time = j.at("wall_time_s").get<double>();
  return r;
}

/// One row per report: kind,parameter,bound,computed,slack,holds.
inline std::string reports_csv(const RunReport& r) {
  std::string out = "kind,parameter,bound,computed,slack,holds\n";
  for (const BoundReport& b : r.reports) {
    out += b.kind + "," + detail::csv_number(b.parameter) + "," + detail::csv_number(b.bound) + "," +
           detail::csv_number(b.computed) + "," + detail::csv_number(b.slack) + "," + (b.holds ? "true" : "false") + "\n";
  }
  return out;
}

struct EmitOptions {
  bool json = true;
  bool csv = true;
  bool timings = false;
};

/// Writes the JSON report and/or the CSV table into `dir`; returns the paths.
inline std::vector<std::filesystem::path> emit(const RunReport& r, const std::filesystem::path& dir,
                                               const std::string& json_name, const std::string& csv_name,
                                               const EmitOptions& o = {}) {
  std::vector<std::filesystem::path> written;
  if (o.json) {
    written.push_back(dir / json_name);
    detail::write_file(written.back(), to_json(r, o.timings).dump(2) + "\n");
  }
  if (o.csv) {
    written.push_back(dir / csv_name);
    detail::write_file(written.back(), reports_csv(r));
  }
  return written;
}

}  // namespace spectral_bounds
