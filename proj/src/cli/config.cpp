#include "warprig/cli/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace warprig::cli {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + msg);
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(at(key) + ": required field missing");
      return *fallback;
    }
    return as_number(raw(key), at(key));
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) throw ConfigError(at(key) + ": required field missing");
      return *fallback;
    }
    return as_integer(raw(key), at(key));
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key) + ": expected a string");
    const std::string s = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(at(key) + ": '" + s + "' is not one of {" + list + "}");
    }
    return s;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key) + ": expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(as_integer(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::optional<Reader> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Reader(raw(key), at(key));
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigError(at(key) + ": unknown key");
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
    return d;
  }

  static int as_integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    const auto i = v.get<long long>();
    if (i < -1000000000LL || i > 1000000000LL) throw ConfigError(where + ": integer out of range");
    return static_cast<int>(i);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

WarpProfile read_profile(Reader r) {
  const double mean = r.number("mean");
  auto c = r.numbers("cos", {});
  auto s = r.numbers("sin", {});
  r.finish();
  try {
    return WarpProfile(mean, std::move(c), std::move(s));
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

SurfaceInit read_surface(std::optional<Reader> r, int dims) {
  SurfaceInit s;
  if (!r) return s;
  s.height = r->number("height", 0.0);
  if (r->has("terms")) {
    const json& arr = r->raw("terms");
    if (!arr.is_array()) r->fail("terms: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader t(arr[i], r->at("terms") + "[" + std::to_string(i) + "]");
      WaveTerm w;
      w.amplitude = t.number("amplitude");
      w.wavenumbers = t.integers("wavenumbers", {});
      w.phase = t.number("phase", 0.0);
      if (static_cast<int>(w.wavenumbers.size()) != dims)
        t.fail("wavenumbers: need one entry per fiber axis (" + std::to_string(dims) + ")");
      t.finish();
      s.terms.push_back(std::move(w));
    }
  }
  r->finish();
  return s;
}

SolveOptions read_solver(std::optional<Reader> r) {
  SolveOptions o;
  if (!r) return o;
  o.mode = r->string("mode", "newton", {"newton", "gradient_flow"}) == "newton" ? SolveMode::newton
                                                                              : SolveMode::gradient_flow;
  o.tolerance = r->number("tolerance", o.tolerance);
  o.max_iterations = r->integer("max_iterations", o.max_iterations);
  o.initial_step = r->number("initial_step", o.initial_step);
  o.min_step = r->number("min_step", o.min_step);
  r->finish();
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    r->fail(e.what());
  }
  return o;
}

SpectralKind read_kind(Reader& r) {
  return r.string("kind", "ricci", {"ricci", "scalar"}) == "ricci" ? SpectralKind::ricci : SpectralKind::scalar;
}

std::map<std::string, double> default_tolerances(const std::string& task) {
  if (task == "verify") return {{"identity_residual", 1e-12}};
  if (task == "curvature") return {{"oracle_deviation", 1e-6}};
  if (task == "minimize")
    return {{"htilde_residual", 1e-10}, {"energy", 1e-8},        {"slice_deviation", 1e-8},
            {"umbilicity", 1e-6},       {"tangential_w", 1e-6},  {"spectral_equality", 1e-6},
            {"rigidity_htilde", 1e-6}};
  if (task == "spectrum") return {{"eigenvalue", 1e-8}, {"stability_lower_bound", 1e-7}};
  if (task == "foliate")
    return {{"mean_constraint", 1e-12}, {"leaf_constancy", 1e-9}, {"monotonicity", 1e-8},
            {"phi_nonpositive", 0.0},   {"energy_spread", 1e-8},  {"linearization", 1e-4}};
  return {{"umbilicity", 1e-6}, {"tangential_w", 1e-6}, {"spectral_equality", 1e-6}, {"htilde", 1e-6}};
}

bool uses_grid(const std::string& task) { return task != "verify" && task != "curvature"; }

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"verify", "curvature", "minimize", "spectrum", "foliate", "rigidity"};
  return names;
}

GraphSurface SurfaceInit::build(const PeriodicGrid& grid) const {
  return GraphSurface::from_function(grid, [&](std::span<const double> x) {
    double v = height;
    for (const WaveTerm& w : terms) {
      double arg = w.phase;
      for (std::size_t a = 0; a < x.size(); ++a)
        arg += 2.0 * std::numbers::pi * w.wavenumbers[a] * x[a] / grid.period(static_cast<int>(a));
      v += w.amplitude * std::cos(arg);
    }
    return v;
  });
}

RadialWeight ExperimentConfig::weight() const {
  if (weight_kind == "canonical") return RadialWeight::canonical();
  if (weight_kind == "unit") return RadialWeight::unit();
  if (weight_kind == "profile") return RadialWeight::from_profile(*weight_profile);
  return RadialWeight::canonical_times(*weight_profile);
}

PeriodicGrid ExperimentConfig::grid() const { return PeriodicGrid(resolution, spec.fiber.periods, scheme); }

double ExperimentConfig::tolerance(const std::string& check) const {
  const auto it = tolerances.find(check);
  if (it == tolerances.end()) throw std::logic_error("no tolerance registered for check '" + check + "'");
  return it->second;
}

ExperimentConfig parse_config(const std::string& text, const std::string& task_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  Reader root(doc, "");
  ExperimentConfig cfg;
  cfg.canonical = doc.dump();

  std::string task = root.has("task") ? root.string("task", "", task_names()) : "";
  if (!task_override.empty()) {
    if (std::find(task_names().begin(), task_names().end(), task_override) == task_names().end())
      throw ConfigError("unknown task '" + task_override + "'");
    if (!task.empty() && task != task_override)
      throw ConfigError("task: config says '" + task + "' but the command asks for '" + task_override + "'");
    task = task_override;
  }
  if (task.empty()) throw ConfigError("task: required field missing");
  cfg.task = task;

  // ambient
  {
    auto amb = root.child("ambient");
    if (!amb) root.fail("ambient: required field missing");
    const int n = amb->integer("n");
    if (n < 3 || n > 7) amb->fail("n: must lie in [3, 7]");
    const double gamma = amb->number("gamma", n - 1.0);
    auto warp_reader = amb->child("warp");
    if (!warp_reader) amb->fail("warp: required field missing");
    WarpProfile warp = read_profile(*warp_reader);
    std::vector<double> periods(n - 1, 2.0 * std::numbers::pi);
    double sc = 0.0;
    if (auto fib = amb->child("fiber")) {
      periods = fib->numbers("periods", periods);
      sc = fib->number("scalar_curvature", 0.0);
      fib->finish();
    }
    amb->finish();
    try {
      cfg.spec = WarpedMetricSpec::make(n, std::move(warp), std::move(periods), sc, gamma);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("ambient: ") + e.what());
    }
  }

  // weight
  if (auto w = root.child("weight")) {
    cfg.weight_kind = w->string("kind", "canonical", {"canonical", "unit", "profile", "canonical_times"});
    const bool needs_profile = cfg.weight_kind == "profile" || cfg.weight_kind == "canonical_times";
    if (auto p = w->child("profile")) {
      if (!needs_profile) w->fail("profile: only allowed with kind 'profile' or 'canonical_times'");
      cfg.weight_profile = read_profile(*p);
    } else if (needs_profile) {
      w->fail("profile: required for kind '" + cfg.weight_kind + "'");
    }
    w->finish();
  }

  // grid
  const int d = cfg.spec.fiber.dim;
  cfg.resolution.assign(d, d <= 2 ? 64 : 16);
  if (auto g = root.child("grid")) {
    cfg.resolution = g->integers("resolution", cfg.resolution);
    cfg.scheme = g->string("scheme", "spectral", {"spectral", "central"}) == "spectral" ? DifferenceScheme::spectral
                                                                                       : DifferenceScheme::central;
    g->finish();
  }
  if (uses_grid(task)) {
    if (d > 3) throw ConfigError("grid: surface tasks support fiber dimension <= 3 (n <= 4)");
    if (static_cast<int>(cfg.resolution.size()) != d)
      throw ConfigError("grid.resolution: need one entry per fiber axis (" + std::to_string(d) + ")");
    try {
      (void)cfg.grid();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }

  // params
  std::optional<Reader> params = root.child("params");
  json empty = json::object();
  Reader pr = params ? std::move(*params) : Reader(empty, "params");
  if (task == "verify") {
    VerifyParams p;
    p.samples = pr.integer("samples", p.samples);
    p.dimensions = pr.integers("dimensions", p.dimensions);
    if (p.samples < 1) pr.fail("samples: must be >= 1");
    for (int n : p.dimensions)
      if (n < 3 || n > 7) pr.fail("dimensions: entries must lie in [3, 7]");
    cfg.params = p;
  } else if (task == "curvature") {
    CurvatureParams p;
    p.samples = pr.integer("samples", p.samples);
    p.step = pr.number("step", p.step);
    if (p.samples < 1) pr.fail("samples: must be >= 1");
    if (!(p.step >= 2e-6 && p.step <= 1e-2)) pr.fail("step: must lie in [2e-6, 1e-2]");
    cfg.params = p;
  } else if (task == "minimize") {
    MinimizeParams p;
    p.initial = read_surface(pr.child("initial"), d);
    p.solve = read_solver(pr.child("solver"));
    if (pr.has("expected_energy")) p.expected_energy = pr.number("expected_energy");
    p.expect_slice = pr.boolean("expect_slice", false);
    p.kind = read_kind(pr);
    cfg.params = p;
  } else if (task == "spectrum") {
    SpectrumParams p;
    p.op = pr.string("operator", p.op, {"stability", "conformal_fiber", "conformal_surface"});
    p.k = pr.integer("k", p.k);
    p.surface = read_surface(pr.child("surface"), d);
    p.minimize_first = pr.boolean("minimize_first", false);
    p.solve = read_solver(pr.child("solver"));
    p.expected = pr.numbers("expected", {});
    p.expected_tolerance = pr.numbers("expected_tolerance", {});
    if (p.k < 1) pr.fail("k: must be >= 1");
    if (p.expected.size() > static_cast<std::size_t>(p.k)) pr.fail("expected: more values than k");
    if (!p.expected_tolerance.empty() && p.expected_tolerance.size() != p.expected.size())
      pr.fail("expected_tolerance: need one entry per expected value");
    if (p.op != "stability" && cfg.spec.n == 3)
      pr.fail("operator: the conformal operator needs n >= 4 (its coefficient 2(n-2)/(n-3) is singular at n = 3)");
    cfg.params = p;
  } else if (task == "foliate") {
    FoliateParams p;
    p.epsilon = pr.number("epsilon", p.epsilon);
    p.steps = pr.integer("steps", p.steps);
    p.solve = read_solver(pr.child("solver"));
    p.expect_constant_energy = pr.boolean("expect_constant_energy", false);
    p.linearization = pr.boolean("linearization", false);
    if (p.epsilon < 0.0) pr.fail("epsilon: must be >= 0");
    if (p.epsilon == 0.0) p.steps = 1;
    if (p.steps < 1 || (p.epsilon > 0.0 && p.steps < 2)) pr.fail("steps: need >= 2 leaves for a nonzero range");
    cfg.params = p;
  } else {
    RigidityParams p;
    p.surface = read_surface(pr.child("surface"), d);
    p.minimize_first = pr.boolean("minimize_first", true);
    p.solve = read_solver(pr.child("solver"));
    p.kind = read_kind(pr);
    if (p.kind == SpectralKind::scalar && cfg.spec.n < 4) pr.fail("kind: scalar needs n >= 4");
    cfg.params = p;
  }
  pr.finish();

  // tolerances
  cfg.tolerances = default_tolerances(task);
  if (auto t = root.child("tolerances")) {
    for (auto& [name, value] : cfg.tolerances) {
      value = t->number(name, value);
      if (value < 0.0) t->fail(name + ": must be >= 0");
    }
    t->finish();
  }
  root.finish();
  return cfg;
}

std::string config_hash(const ExperimentConfig& config) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(config.canonical.data(), config.canonical.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("config_hash: SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace warprig::cli
