#pragma once

// Scenario files: a JSON description of a problem, how to obtain its
// spectrum, and which bounds to evaluate on which parameter grids. Every
// validation error names the offending field by its path, e.g. `grid.nx`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectral_bounds/domain.hpp"
#include "spectral_bounds/error.hpp"
#include "spectral_bounds/expr.hpp"
#include "spectral_bounds/fd_solver.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/phase_space.hpp"
#include "spectral_bounds/problem.hpp"
#include "spectral_bounds/report.hpp"

namespace spectral_bounds {

/// A schema violation; `path` is the dotted path of the field at fault.
class ScenarioError : public InvalidInput {
 public:
  ScenarioError(std::string path, const std::string& msg)
      : InvalidInput((path.empty() ? std::string("scenario") : path) + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class SpectrumSource { fd, exact_rectangle, exact_torus, exact_sphere };

inline const char* to_string(SpectrumSource s) {
  switch (s) {
    case SpectrumSource::fd: return "fd";
    case SpectrumSource::exact_rectangle: return "exact-rectangle";
    case SpectrumSource::exact_torus: return "exact-torus";
    case SpectrumSource::exact_sphere: return "exact-sphere";
  }
  return "?";
}

/// Parameter grid: explicit values, an integer range, or a linear/log
/// spaced range whose upper end may be the spectrum cutoff.
struct ParamRange {
  std::vector<double> values;  // explicit or already expanded
  double from = 0.0;
  double to = 0.0;
  int count = 0;
  bool log_spaced = false;
  bool to_cutoff = false;

  bool deferred() const { return to_cutoff; }

  std::vector<double> expand(double cutoff) const {
    if (!to_cutoff) return values;
    return spaced(from, cutoff, count, log_spaced);
  }

  /// Largest value when known without the spectrum.
  std::optional<double> known_max() const {
    if (to_cutoff || values.empty()) return std::nullopt;
    return *std::max_element(values.begin(), values.end());
  }
  std::optional<double> known_min() const {
    if (values.empty()) return to_cutoff ? std::optional<double>(from) : std::nullopt;
    return *std::min_element(values.begin(), values.end());
  }

  static std::vector<double> spaced(double a, double b, int n, bool log) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      v.push_back(log ? a * std::pow(b / a, f) : a + (b - a) * f);
    }
    if (n > 1) v.back() = b;
    return v;
  }
};

enum class ParamKind { k, z, t, p, none };

struct BoundRequest {
  std::string kind;
  ParamKind param = ParamKind::k;
  ParamRange range;
  double H = 0.0;   // general_sum: H_Ω override (0 = Euclidean)
  int count = 0;    // avp_riesz: instances
  int n = 0;        // avp_*: matrix size
  std::string path; // for error messages
};

struct ManifoldSpec {
  bool sphere = false;
  Lattice2 lattice;
  int dim = 2;
  std::optional<double> vol_ratio;
};

struct PhaseSpaceSpec {
  std::vector<double> lambda_grid;
  int grid = 200;
  PhaseSpaceBoundOptions options;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::optional<ProblemSpec> problem;  // absent only for the sphere
  int sphere_dim = 2;
  Expr w = Expr::constant(1.0), rho = Expr::constant(0.0), V = Expr::constant(0.0);
  std::vector<int> grid;
  SpectrumSource source = SpectrumSource::fd;
  std::size_t k = 0;  // FD: number of eigenvalues; exact: minimum listed
  std::optional<double> cutoff;
  SolverMethod method = SolverMethod::automatic;
  double tolerance = 1e-8;
  bool convergence_check = false;
  std::optional<ManifoldSpec> manifold;
  std::optional<PhaseSpaceSpec> phase_space;
  std::vector<BoundRequest> bounds;
  std::string json_name = "report.json";
  std::string csv_name = "report.csv";
  std::string digest;  // of the canonical (re-serialised) input

  int nu() const { return problem ? problem->nu : sphere_dim; }
};

/// Bound kinds and the parameter each is indexed by.
inline ParamKind param_kind_of(const std::string& kind) {
  static const std::vector<std::pair<std::string, ParamKind>> table = {
      {"kroger_avg", ParamKind::k},        {"general_sum", ParamKind::k},
      {"individual_sk", ParamKind::k},     {"individual_pos_implicit", ParamKind::k},
      {"individual_pos_max", ParamKind::k}, {"phase_space_sum", ParamKind::k},
      {"riesz_lower", ParamKind::z},       {"heat_lower", ParamKind::t},
      {"homog_riesz", ParamKind::z},       {"homog_sum", ParamKind::p},
      {"heat_homog", ParamKind::t},        {"heat_torus", ParamKind::t},
      {"avp_riesz", ParamKind::none},      {"avp_frame_mean", ParamKind::k},
  };
  for (const auto& [k, p] : table)
    if (k == kind) return p;
  throw InvalidInput("unknown bound kind '" + kind + "'");
}

inline const char* param_name(ParamKind p) {
  switch (p) {
    case ParamKind::k: return "k";
    case ParamKind::z: return "z";
    case ParamKind::t: return "t";
    case ParamKind::p: return "p";
    case ParamKind::none: return "";
  }
  return "";
}

namespace detail {

using json = nlohmann::json;

/// A JSON value together with its path, with typed accessors that raise
/// ScenarioError naming the path.
class JsonField {
 public:
  JsonField(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *j_; }
  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(path_, msg); }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_->is_object()) fail("must be an object");
    for (const auto& [key, _] : j_->items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ScenarioError(child_path(key), "unknown field");
    }
  }
  bool has(const char* key) const { return j_->contains(key); }
  JsonField at(const char* key) const {
    if (!j_->contains(key)) throw ScenarioError(child_path(key), "required field is missing");
    return JsonField((*j_)[key], child_path(key));
  }
  std::optional<JsonField> opt(const char* key) const {
    if (!j_->contains(key)) return std::nullopt;
    return JsonField((*j_)[key], child_path(key));
  }

  double number() const {
    if (!j_->is_number()) fail("must be a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  long integer() const {
    if (!j_->is_number_integer() && !(j_->is_number() && number() == std::floor(number())))
      fail("must be an integer");
    return j_->get<long>();
  }
  long positive_integer() const {
    const long v = integer();
    if (v < 1) fail("must be a positive integer");
    return v;
  }
  std::string string() const {
    if (!j_->is_string()) fail("must be a string");
    return j_->get<std::string>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("must be a boolean");
    return j_->get<bool>();
  }
  std::vector<double> numbers(std::size_t expected = 0) const {
    if (!j_->is_array()) fail("must be an array of numbers");
    if (expected && j_->size() != expected) fail("must have " + std::to_string(expected) + " entries");
    std::vector<double> v;
    for (std::size_t i = 0; i < j_->size(); ++i) v.push_back(JsonField((*j_)[i], path_ + "[" + std::to_string(i) + "]").number());
    return v;
  }
  /// A field expression given as a string or a number.
  Expr expr() const {
    if (j_->is_number()) return Expr::constant(number());
    try {
      return parse_field(string());
    } catch (const Error& e) {
      fail(std::string("invalid expression: ") + e.what());
    }
  }

 private:
  const json* j_;
  std::string path_;
};

inline ParamRange parse_range(const JsonField& n, ParamKind kind) {
  ParamRange r;
  const bool integral = kind == ParamKind::k;
  auto check_value = [&](const JsonField& v) {
    if (integral) return static_cast<double>(v.positive_integer());
    const double x = v.number();
    if ((kind == ParamKind::t || kind == ParamKind::p) && !(x > 0.0)) v.fail("must be positive");
    return x;
  };
  if (n.raw().is_array()) {
    if (n.raw().empty()) n.fail("parameter list must not be empty");
    for (std::size_t i = 0; i < n.raw().size(); ++i)
      r.values.push_back(check_value(JsonField(n.raw()[i], n.path() + "[" + std::to_string(i) + "]")));
    return r;
  }
  if (n.raw().is_number()) {
    r.values.push_back(check_value(n));
    return r;
  }
  n.require_object({"from", "to", "count", "step", "scale"});
  r.from = check_value(n.at("from"));
  const JsonField to = n.at("to");
  if (to.raw().is_string()) {
    if (to.string() != "cutoff") to.fail("must be a number or \"cutoff\"");
    if (kind != ParamKind::z) to.fail("\"cutoff\" is only allowed for z grids");
    r.to_cutoff = true;
  } else {
    r.to = check_value(to);
    if (r.to < r.from) to.fail("must be >= from");
  }
  if (const auto s = n.opt("scale")) {
    const std::string v = s->string();
    if (v != "linear" && v != "log") s->fail("must be \"linear\" or \"log\"");
    r.log_spaced = v == "log";
    if (r.log_spaced && !(r.from > 0.0)) n.at("from").fail("must be positive for a log scale");
  }
  if (integral) {
    if (n.has("count") || r.to_cutoff) n.fail("k ranges use from/to/step");
    const long step = n.opt("step") ? n.at("step").positive_integer() : 1;
    for (double v = r.from; v <= r.to; v += static_cast<double>(step)) r.values.push_back(v);
    return r;
  }
  if (n.has("step")) n.at("step").fail("real ranges use count");
  r.count = static_cast<int>(n.at("count").positive_integer());
  if (!r.to_cutoff) r.values = ParamRange::spaced(r.from, r.to, r.count, r.log_spaced);
  return r;
}

inline Lattice2 parse_lattice(const JsonField& n) {
  const auto e1 = n.at("e1").numbers(2);
  const auto e2 = n.at("e2").numbers(2);
  try {
    return Lattice2({e1[0], e1[1]}, {e2[0], e2[1]});
  } catch (const InvalidInput& e) {
    n.fail(e.what());
  }
}

inline std::optional<Domain> parse_domain(const JsonField& n, int& sphere_dim) {
  n.require_object({"type", "lengths", "offset", "radius", "center", "inside", "e1", "e2", "dim"});
  const std::string type = n.at("type").string();
  try {
    if (type == "box") {
      n.require_object({"type", "lengths", "offset"});
      const auto l = n.at("lengths").numbers();
      if (l.empty()) n.at("lengths").fail("must not be empty");
      const auto off = n.opt("offset") ? n.at("offset").numbers(l.size()) : std::vector<double>{};
      return Domain::box(l, off);
    }
    if (type == "disk") {
      n.require_object({"type", "radius", "center"});
      const auto c = n.opt("center") ? n.at("center").numbers(2) : std::vector<double>{0.0, 0.0};
      return Domain::disk(n.at("radius").positive(), c);
    }
    if (type == "masked_box") {
      n.require_object({"type", "lengths", "offset", "inside"});
      const auto l = n.at("lengths").numbers();
      const auto off = n.opt("offset") ? n.at("offset").numbers(l.size()) : std::vector<double>{};
      return Domain::masked_box(l, off, n.at("inside").expr());
    }
    if (type == "torus") {
      n.require_object({"type", "e1", "e2"});
      return Domain::torus(parse_lattice(n));
    }
    if (type == "sphere") {
      n.require_object({"type", "dim"});
      sphere_dim = n.opt("dim") ? static_cast<int>(n.at("dim").positive_integer()) : 2;
      if (sphere_dim < 2) n.at("dim").fail("must be >= 2");
      return std::nullopt;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const InvalidInput& e) {
    n.fail(e.what());
  }
  n.at("type").fail("must be one of box, disk, masked_box, torus, sphere");
}

inline SolverMethod parse_method(const JsonField& n) {
  const std::string m = n.string();
  if (m == "automatic") return SolverMethod::automatic;
  if (m == "dense") return SolverMethod::dense;
  if (m == "iterative") return SolverMethod::iterative;
  n.fail("must be automatic, dense or iterative");
}

inline SpectrumSource parse_source(const JsonField& n) {
  const std::string s = n.string();
  if (s == "fd") return SpectrumSource::fd;
  if (s == "exact-rectangle") return SpectrumSource::exact_rectangle;
  if (s == "exact-torus") return SpectrumSource::exact_torus;
  if (s == "exact-sphere") return SpectrumSource::exact_sphere;
  n.fail("must be fd, exact-rectangle, exact-torus or exact-sphere");
}

/// Index of the largest eigenvalue a k-indexed request reads.
inline std::size_t spectrum_need(const BoundRequest& r) {
  if (r.param == ParamKind::k) {
    if (r.kind.rfind("avp_", 0) == 0) return 0;
    const std::size_t kmax = static_cast<std::size_t>(*r.range.known_max());
    const bool individual = r.kind.rfind("individual_", 0) == 0;
    return individual ? kmax + 1 : kmax;
  }
  return 0;
}

}  // namespace detail

/// Validates and converts a parsed JSON document.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::JsonField;
  const JsonField root(j, "");
  root.require_object({"name", "seed", "domain", "fields", "grid", "spectrum", "manifold", "phase_space",
                       "bounds", "output"});
  Scenario s;
  s.name = root.opt("name") ? root.at("name").string() : "scenario";
  if (const auto n = root.opt("seed")) {
    const long v = n->integer();
    if (v < 0) n->fail("must be non-negative");
    s.seed = static_cast<std::uint64_t>(v);
  }

  const std::optional<Domain> dom = detail::parse_domain(root.at("domain"), s.sphere_dim);
  if (const auto f = root.opt("fields")) {
    f->require_object({"w", "rho", "V"});
    if (f->has("w")) s.w = f->at("w").expr();
    if (f->has("rho")) s.rho = f->at("rho").expr();
    if (f->has("V")) s.V = f->at("V").expr();
  }
  if (dom) {
    s.problem.emplace(*dom, s.w, s.rho, s.V, s.name);
    try {
      s.problem->validate();
    } catch (const InvalidInput& e) {
      root.at("fields").fail(e.what());
    }
  } else {
    for (const auto& [name, e] : {std::pair{"w", &s.w}, {"rho", &s.rho}, {"V", &s.V}})
      if (!e->constant_value())
        throw ScenarioError(std::string("fields.") + name, "must be constant on the sphere");
    if (!(*s.w.constant_value() > 0.0)) throw ScenarioError("fields.w", "must be positive");
  }

  // Spectrum source.
  s.source = dom ? SpectrumSource::fd : SpectrumSource::exact_sphere;
  std::optional<long> requested_k;
  if (const auto sp = root.opt("spectrum")) {
    sp->require_object({"source", "k", "cutoff", "method", "tolerance", "convergence_check"});
    if (sp->has("source")) s.source = detail::parse_source(sp->at("source"));
    if (sp->has("k")) requested_k = sp->at("k").positive_integer();
    if (sp->has("cutoff")) s.cutoff = sp->at("cutoff").number();
    if (sp->has("method")) s.method = detail::parse_method(sp->at("method"));
    if (sp->has("tolerance")) s.tolerance = sp->at("tolerance").positive();
    if (sp->has("convergence_check")) s.convergence_check = sp->at("convergence_check").boolean();
  }
  const auto constant_fields = [&](const char* why) {
    for (const auto& [name, e] : {std::pair{"w", &s.w}, {"rho", &s.rho}, {"V", &s.V}})
      if (!e->constant_value()) throw ScenarioError(std::string("fields.") + name, std::string("must be constant for ") + why);
  };
  switch (s.source) {
    case SpectrumSource::fd:
      if (!dom) throw ScenarioError("spectrum.source", "fd requires a Euclidean or torus domain");
      break;
    case SpectrumSource::exact_rectangle:
      if (!dom || !std::holds_alternative<BoxDomain>(dom->variant()))
        throw ScenarioError("spectrum.source", "exact-rectangle requires a box domain");
      constant_fields("an exact spectrum");
      break;
    case SpectrumSource::exact_torus:
      if (!dom || !dom->is_periodic()) throw ScenarioError("spectrum.source", "exact-torus requires a torus domain");
      constant_fields("an exact spectrum");
      break;
    case SpectrumSource::exact_sphere:
      if (dom) throw ScenarioError("spectrum.source", "exact-sphere requires a sphere domain");
      break;
  }

  if (s.source == SpectrumSource::fd) {
    s.grid.assign(static_cast<std::size_t>(s.nu()), 64);
    if (const auto g = root.opt("grid")) {
      g->require_object({"n", "nx", "ny", "nz"});
      if (g->has("n")) s.grid.assign(s.grid.size(), static_cast<int>(g->at("n").positive_integer()));
      const char* axes[] = {"nx", "ny", "nz"};
      for (int a = 0; a < 3; ++a) {
        if (!g->has(axes[a])) continue;
        if (a >= s.nu()) g->at(axes[a]).fail("axis beyond the domain dimension");
        s.grid[static_cast<std::size_t>(a)] = static_cast<int>(g->at(axes[a]).positive_integer());
      }
    }
  } else if (root.has("grid")) {
    root.at("grid").require_object({"n", "nx", "ny", "nz"});
  }

  if (const auto m = root.opt("manifold")) {
    m->require_object({"type", "e1", "e2", "dim", "vol_ratio"});
    ManifoldSpec ms;
    const std::string type = m->at("type").string();
    if (type == "torus") {
      ms.lattice = detail::parse_lattice(*m);
    } else if (type == "sphere") {
      ms.sphere = true;
      ms.dim = m->opt("dim") ? static_cast<int>(m->at("dim").positive_integer()) : 2;
      if (ms.dim < 2) m->at("dim").fail("must be >= 2");
    } else {
      m->at("type").fail("must be torus or sphere");
    }
    if (m->has("vol_ratio")) {
      ms.vol_ratio = m->at("vol_ratio").positive();
      if (*ms.vol_ratio > 1.0) m->at("vol_ratio").fail("must lie in (0, 1]");
    }
    s.manifold = ms;
  }

  if (const auto ps = root.opt("phase_space")) {
    ps->require_object({"lambda", "grid", "correction", "bessel_order", "lip_override"});
    PhaseSpaceSpec p;
    p.lambda_grid = ParamRange::spaced(0.0, 50.0, 6, false);
    if (ps->has("lambda")) {
      const ParamRange r = detail::parse_range(ps->at("lambda"), ParamKind::z);
      if (r.to_cutoff) ps->at("lambda").fail("must not refer to the cutoff");
      p.lambda_grid = r.values;
      for (std::size_t i = 1; i < p.lambda_grid.size(); ++i)
        if (!(p.lambda_grid[i] > p.lambda_grid[i - 1])) ps->at("lambda").fail("must be strictly increasing");
    }
    if (ps->has("grid")) p.grid = static_cast<int>(ps->at("grid").positive_integer());
    if (ps->has("correction")) {
      const std::string c = ps->at("correction").string();
      if (c == "optimized") p.options.correction = PhaseSpaceCorrection::optimized;
      else if (c == "display") p.options.correction = PhaseSpaceCorrection::display;
      else ps->at("correction").fail("must be optimized or display");
    }
    if (ps->has("bessel_order")) p.options.bessel_order = ps->at("bessel_order").number();
    if (ps->has("lip_override")) {
      p.options.lip_override = ps->at("lip_override").number();
      if (*p.options.lip_override < 0.0) ps->at("lip_override").fail("must be >= 0");
    }
    s.phase_space = p;
  }

  if (const auto b = root.opt("bounds")) {
    if (!b->raw().is_array()) b->fail("must be an array");
    for (std::size_t i = 0; i < b->raw().size(); ++i) {
      const JsonField n(b->raw()[i], b->path() + "[" + std::to_string(i) + "]");
      n.require_object({"kind", "k", "z", "t", "p", "H", "count", "n"});
      std::string kind = n.at("kind").string();
      std::vector<std::string> kinds{kind};
      if (kind == "individual_pos") kinds = {"individual_pos_implicit", "individual_pos_max"};
      for (const std::string& kd : kinds) {
        BoundRequest r;
        r.kind = kd;
        r.path = n.path();
        try {
          r.param = param_kind_of(kd);
        } catch (const InvalidInput& e) {
          n.at("kind").fail(e.what());
        }
        for (const char* key : {"k", "z", "t", "p"})
          if (n.has(key) && key != std::string(param_name(r.param)))
            n.at(key).fail(std::string("not a parameter of ") + kind);
        if (r.param != ParamKind::none) r.range = detail::parse_range(n.at(param_name(r.param)), r.param);
        if (n.has("H")) {
          if (kd != "general_sum") n.at("H").fail("only general_sum takes H");
          r.H = n.at("H").positive();
        }
        if (kd == "avp_riesz") {
          r.count = static_cast<int>(n.at("count").positive_integer());
          r.n = n.has("n") ? static_cast<int>(n.at("n").positive_integer()) : 12;
        } else if (kd == "avp_frame_mean") {
          r.n = n.has("n") ? static_cast<int>(n.at("n").positive_integer()) : 8;
          if (r.n > 12) n.at("n").fail("must be <= 12 for exhaustive enumeration");
          if (*r.range.known_max() > r.n) n.at("k").fail("must not exceed n");
        } else {
          if (n.has("count")) n.at("count").fail(std::string("not a field of ") + kind);
          if (n.has("n")) n.at("n").fail(std::string("not a field of ") + kind);
        }
        const bool needs_problem = kd != "homog_riesz" && kd != "homog_sum" && kd != "heat_homog" &&
                                   kd.rfind("avp_", 0) != 0;
        if (needs_problem && !s.problem) n.at("kind").fail("requires a Euclidean or torus domain");
        if ((kd == "homog_riesz" || kd == "homog_sum" || kd == "heat_homog") && !s.manifold)
          throw ScenarioError("manifold", "required by " + kd);
        if (kd == "heat_torus" && !(s.problem && s.problem->domain.is_periodic()))
          n.at("kind").fail("heat_torus requires a torus domain");
        if (kd == "phase_space_sum" && !s.phase_space) s.phase_space = PhaseSpaceSpec{ParamRange::spaced(0.0, 50.0, 6, false)};
        s.bounds.push_back(std::move(r));
      }
    }
  }

  // Spectrum length: enough for every k-indexed request.
  std::size_t need = 0;
  for (const BoundRequest& r : s.bounds) need = std::max(need, detail::spectrum_need(r));
  if (requested_k) {
    if (static_cast<std::size_t>(*requested_k) < need)
      throw ScenarioError("spectrum.k", "smaller than the " + std::to_string(need) +
                                            " eigenvalues the requested bounds read");
    s.k = static_cast<std::size_t>(*requested_k);
  } else {
    s.k = std::max<std::size_t>(need, 6);
  }

  if (const auto o = root.opt("output")) {
    o->require_object({"json", "csv"});
    if (o->has("json")) s.json_name = o->at("json").string();
    if (o->has("csv")) s.csv_name = o->at("csv").string();
  }
  s.digest = fnv1a_hex(j.dump());
  return s;
}

inline Scenario load_scenario_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("", std::string("not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str());
}

}  // namespace spectral_bounds
