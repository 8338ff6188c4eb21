#include "fsbc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fsbc/initial_data.hpp"
#include "fsbc/io.hpp"

namespace fsbc {
namespace {

using nlohmann::json;

/// Reads members of one JSON object and rejects anything it did not consume.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  template <class T>
  void get(const std::string& name, T& out) {
    seen_.insert(name);
    auto it = j_.find(name);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key(name), std::string("wrong type (") + e.what() + ")");
    }
  }

  void get(const std::string& name, std::optional<double>& out) {
    seen_.insert(name);
    auto it = j_.find(name);
    if (it == j_.end() || it->is_null()) return;
    if (!it->is_number()) throw ConfigError(key(name), "expected a number or null");
    out = it->get<double>();
  }

  Section sub(const std::string& name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return Section(it == j_.end() ? empty() : *it, key(name));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_override(json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(kv, "override must look like KEY=VALUE");
  const std::string key = kv.substr(0, eq);
  const std::string text = kv.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError(key, "empty key component");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
    node = &(*node)[parts[i]];
  }
  *node = value;
}

void read_surface(Section s, SurfaceFamily& p) {
  s.get("family", p.family);
  s.get("eps", p.eps);
  s.get("k1", p.k1);
  s.get("k2", p.k2);
  s.finish();
}

void read_velocity(Section s, VelocityFamily& p) {
  s.get("family", p.family);
  std::uint64_t seed = p.random.seed;
  s.get("seed", seed);
  p.random.seed = seed;
  s.get("amplitude", p.random.amplitude);
  s.get("kmax", p.random.kmax);
  s.get("mmax", p.random.mmax);
  s.get("decay", p.random.decay);
  s.get("gamma", p.gamma);
  s.get("radius", p.radius);
  s.finish();
}

Config from_json(const json& doc) {
  Config c;
  Section root(doc, "");
  {
    auto s = root.sub("grid");
    s.get("nx", c.grid.nx);
    s.get("ny", c.grid.ny);
    s.get("nz", c.grid.nz);
    s.get("b", c.grid.b);
    s.finish();
  }
  {
    auto s = root.sub("physics");
    s.get("sigma", c.physics.sigma);
    s.get("fixed_lid", c.physics.fixed_lid);
    s.finish();
  }
  {
    auto s = root.sub("cutoff");
    s.get("delta0", c.cutoff.delta0);
    s.get("delta1", c.cutoff.delta1);
    s.finish();
  }
  {
    auto s = root.sub("initial_data");
    read_surface(s.sub("psi0"), c.initial_data.psi0);
    read_velocity(s.sub("v0"), c.initial_data.v0);
    s.get("snapshot", c.initial_data.snapshot);
    s.get("project", c.initial_data.project);
    s.finish();
  }
  {
    auto s = root.sub("stepping");
    s.get("safety", c.stepping.safety);
    s.get("dt", c.stepping.dt);
    s.get("t_end", c.stepping.t_end);
    s.get("max_steps", c.stepping.max_steps);
    s.get("projection_cadence", c.stepping.projection_cadence);
    s.finish();
  }
  {
    auto s = root.sub("tolerances");
    s.get("elliptic_tol", c.tolerances.elliptic_tol);
    s.get("max_iters", c.tolerances.max_iters);
    s.get("restart", c.tolerances.restart);
    s.get("eps_geo", c.tolerances.eps_geo);
    s.finish();
  }
  {
    auto s = root.sub("diagnostics");
    auto& th = c.diagnostics.thresholds;
    s.get("record_every", c.diagnostics.record_every);
    s.get("k2_accumulator_enabled", c.diagnostics.k2_accumulator_enabled);
    s.get("turning_threshold", th.turning_threshold);
    s.get("k1_max", th.k1_max);
    s.get("k1_slope", th.k1_slope);
    s.get("bkm_max", th.bkm_max);
    s.get("bkm_slope", th.bkm_slope);
    s.get("min_growth", th.min_growth);
    s.get("trend_floor", th.trend_floor);
    s.get("window", th.window);
    s.finish();
  }
  {
    auto s = root.sub("output");
    s.get("directory", c.output.directory);
    s.get("snapshot_every", c.output.snapshot_every);
    s.finish();
  }
  {
    auto s = root.sub("check");
    s.get("flat_only", c.check.flat_only);
    s.finish();
  }
  {
    auto s = root.sub("dispersion");
    s.get("modes", c.dispersion.modes);
    s.get("eps", c.dispersion.eps);
    s.finish();
  }
  root.finish();
  c.diagnostics.thresholds.eps_geo = c.tolerances.eps_geo;
  return c;
}

void positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive finite number");
}

void at_least(const std::string& key, long v, long lo) {
  if (v < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
}

double surface_sup(const Config& c, const Grid& g) {
  if (!c.initial_data.snapshot.empty()) return max_abs(initial_state(c, g).psi);
  return c.initial_data.psi0.family == "flat" ? 0.0 : std::abs(c.initial_data.psi0.eps);
}

}  // namespace

Config parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  for (const auto& kv : overrides) apply_override(doc, kv);
  Config c = from_json(doc);
  validate(c);
  return c;
}

Config parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

void validate(const Config& c) {
  at_least("grid.nx", c.grid.nx, 8);
  at_least("grid.ny", c.grid.ny, 8);
  at_least("grid.nz", c.grid.nz, 8);
  if (c.grid.nx % 2 || c.grid.ny % 2) throw ConfigError(c.grid.nx % 2 ? "grid.nx" : "grid.ny", "must be even");
  positive("grid.b", c.grid.b);
  if (!(c.physics.sigma > 0.0) || !std::isfinite(c.physics.sigma))
    throw ConfigError("physics.sigma",
                      "must be > 0: the model is posed with surface tension and the sigma = 0 limit is not supported");

  const auto& id = c.initial_data;
  if (id.snapshot.empty()) {
    if (id.psi0.family != "flat" && id.psi0.family != "wave")
      throw ConfigError("initial_data.psi0.family", "unknown family '" + id.psi0.family + "' (flat | wave)");
    if (id.psi0.family == "wave" && !std::isfinite(id.psi0.eps))
      throw ConfigError("initial_data.psi0.eps", "must be finite");
    const auto& v = id.v0.family;
    if (v != "zero" && v != "random_solenoidal" && v != "columnar_vortex")
      throw ConfigError("initial_data.v0.family",
                        "unknown family '" + v + "' (zero | random_solenoidal | columnar_vortex)");
    if (v == "random_solenoidal") {
      at_least("initial_data.v0.kmax", id.v0.random.kmax, 1);
      at_least("initial_data.v0.mmax", id.v0.random.mmax, 0);
      if (!(id.v0.random.amplitude >= 0.0)) throw ConfigError("initial_data.v0.amplitude", "must be >= 0");
    }
    if (v == "columnar_vortex") positive("initial_data.v0.radius", id.v0.radius);
  }

  positive("stepping.safety", c.stepping.safety);
  if (!(c.stepping.dt >= 0.0)) throw ConfigError("stepping.dt", "must be >= 0 (0 selects the CFL step)");
  if (!(c.stepping.t_end >= 0.0)) throw ConfigError("stepping.t_end", "must be >= 0");
  at_least("stepping.max_steps", c.stepping.max_steps, 0);
  at_least("stepping.projection_cadence", c.stepping.projection_cadence, 0);

  positive("tolerances.elliptic_tol", c.tolerances.elliptic_tol);
  at_least("tolerances.max_iters", c.tolerances.max_iters, 1);
  at_least("tolerances.restart", c.tolerances.restart, 1);
  positive("tolerances.eps_geo", c.tolerances.eps_geo);

  at_least("diagnostics.record_every", c.diagnostics.record_every, 1);
  const auto& th = c.diagnostics.thresholds;
  positive("diagnostics.turning_threshold", th.turning_threshold);
  positive("diagnostics.k1_max", th.k1_max);
  positive("diagnostics.k1_slope", th.k1_slope);
  positive("diagnostics.bkm_max", th.bkm_max);
  positive("diagnostics.bkm_slope", th.bkm_slope);
  if (!(th.min_growth >= 1.0)) throw ConfigError("diagnostics.min_growth", "must be >= 1");
  if (!(th.trend_floor >= 0.0)) throw ConfigError("diagnostics.trend_floor", "must be >= 0");
  at_least("diagnostics.window", th.window, 3);

  if (c.output.directory.empty()) throw ConfigError("output.directory", "must not be empty");
  at_least("output.snapshot_every", c.output.snapshot_every, 0);

  if (c.dispersion.modes.empty()) throw ConfigError("dispersion.modes", "must list at least one wavenumber");
  for (int k : c.dispersion.modes)
    if (k < 1 || 3 * k > c.grid.nx) throw ConfigError("dispersion.modes", "each mode must satisfy 1 <= k <= nx/3");
  positive("dispersion.eps", c.dispersion.eps);

  const Grid g = make_grid(c);
  const double sup = surface_sup(c, g);
  if (!(sup < c.grid.b))
    throw ConfigError(id.snapshot.empty() ? "initial_data.psi0.eps" : "initial_data.snapshot",
                      "sup|psi0| must stay below the depth b");
  if (c.physics.fixed_lid && sup != 0.0)
    throw ConfigError("physics.fixed_lid", "a rigid lid requires a flat initial surface");
  make_cutoff(c, g, sup);
}

Grid make_grid(const Config& c) { return Grid(c.grid.nx, c.grid.ny, c.grid.nz, c.grid.b); }

CutoffProfile make_cutoff(const Config& c, const Grid& g, double psi_sup) {
  const double d0 = c.cutoff.delta0.value_or(default_delta0(c.grid.b));
  const double d1 = c.cutoff.delta1.value_or(default_delta1(c.grid.b));
  try {
    return build_cutoff(g, d0, d1, psi_sup);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(c.cutoff.delta1 ? "cutoff.delta1" : (c.cutoff.delta0 ? "cutoff.delta0" : "cutoff"), e.what());
  }
}

DynamicsConfig make_dynamics(const Config& c, const Grid& g, double psi_sup) {
  DynamicsConfig d;
  d.sigma = c.physics.sigma;
  d.cutoff = make_cutoff(c, g, psi_sup);
  d.eps_geo = c.tolerances.eps_geo;
  d.fixed_lid = c.physics.fixed_lid;
  d.solver.tol = c.tolerances.elliptic_tol;
  d.solver.max_iters = c.tolerances.max_iters;
  d.solver.restart = c.tolerances.restart;
  return d;
}

State initial_state(const Config& c, const Grid& g) {
  const auto& id = c.initial_data;
  if (!id.snapshot.empty()) {
    Snapshot snap = read_snapshot(id.snapshot, &g);
    return std::move(snap.state);
  }
  State s = id.psi0.family == "wave" ? single_mode_wave(g, id.psi0.eps, id.psi0.k1, id.psi0.k2) : flat_rest(g);
  if (id.v0.family == "random_solenoidal") {
    const double sup = max_abs(s.psi);
    const auto cut = make_cutoff(c, g, sup);
    const auto geo = lift_surface(g, s.psi, SurfaceField(g), cut);
    s.v = random_solenoidal(g, geo, id.v0.random);
  } else if (id.v0.family == "columnar_vortex") {
    s.v = columnar_vortex(g, id.v0.gamma, id.v0.radius);
  }
  return s;
}

}  // namespace fsbc
