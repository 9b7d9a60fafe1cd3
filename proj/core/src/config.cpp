#include "fks/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fks {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// Rejects keys the schema does not know, so typos do not silently fall back to defaults.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

json run_to_json(const RunConfig& c) {
  return json{
      {"schema_version", kSchemaVersion},
      {"name", c.name},
      {"alpha", c.alpha},
      {"chi", c.chi},
      {"frame", std::string(to_string(c.frame))},
      {"grid", {{"n", c.grid.n}, {"half_width", c.grid.half_width}}},
      {"initial",
       {{"family", std::string(to_string(c.initial.family))},
        {"mass", c.initial.mass},
        {"scale", c.initial.scale},
        {"center", c.initial.center}}},
      {"control",
       {{"safety", c.control.safety},
        {"dt_min", c.control.dt_min},
        {"dt_max", c.control.dt_max},
        {"max_steps", c.control.max_steps},
        {"error_tolerance", c.control.error_tolerance}}},
      {"horizon", c.horizon},
      {"observation_interval", c.observation_interval},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"keep_snapshots", c.keep_snapshots},
      {"dealias", c.dealias},
      {"confinement", std::string(to_string(c.confinement))},
      {"thresholds", {{"growth", c.thresholds.growth}, {"tail", c.thresholds.tail}}},
      {"beta", c.beta},
      {"gns_budget", c.gns_budget},
  };
}

void check_version(const json& j, const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  require(j.contains("schema_version"), where + " lacks schema_version");
  int v = 0;
  read(j, "schema_version", v, where);
  require(v == kSchemaVersion,
          where + ": unsupported schema_version " + std::to_string(v) + " (expected " + std::to_string(kSchemaVersion) + ")");
}

RunConfig run_from_json(const json& j) {
  check_version(j, "run config");
  check_keys(j,
             {"schema_version", "name", "alpha", "chi", "frame", "grid", "initial", "control", "horizon",
              "observation_interval", "seed", "output_dir", "keep_snapshots", "dealias", "confinement", "thresholds",
              "beta", "gns_budget"},
             "run config");
  RunConfig c;
  read(j, "name", c.name, "run");
  read(j, "alpha", c.alpha, "run");
  read(j, "chi", c.chi, "run");
  if (j.contains("frame")) {
    std::string f;
    read(j, "frame", f, "run");
    c.frame = parse_frame(f);
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, {"n", "half_width"}, "grid");
    read(g, "n", c.grid.n, "grid");
    read(g, "half_width", c.grid.half_width, "grid");
  }
  if (j.contains("initial")) {
    const auto& i = j["initial"];
    check_keys(i, {"family", "mass", "scale", "center"}, "initial");
    if (i.contains("family")) {
      std::string f;
      read(i, "family", f, "initial");
      try {
        c.initial.family = parse_family(f);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("initial.family: ") + e.what());
      }
    }
    read(i, "mass", c.initial.mass, "initial");
    read(i, "scale", c.initial.scale, "initial");
    read(i, "center", c.initial.center, "initial");
  }
  if (j.contains("control")) {
    const auto& s = j["control"];
    check_keys(s, {"safety", "dt_min", "dt_max", "max_steps", "error_tolerance"}, "control");
    read(s, "safety", c.control.safety, "control");
    read(s, "dt_min", c.control.dt_min, "control");
    read(s, "dt_max", c.control.dt_max, "control");
    read(s, "max_steps", c.control.max_steps, "control");
    read(s, "error_tolerance", c.control.error_tolerance, "control");
  }
  read(j, "horizon", c.horizon, "run");
  read(j, "observation_interval", c.observation_interval, "run");
  read(j, "seed", c.seed, "run");
  read(j, "output_dir", c.output_dir, "run");
  read(j, "keep_snapshots", c.keep_snapshots, "run");
  read(j, "dealias", c.dealias, "run");
  if (j.contains("confinement")) {
    std::string f;
    read(j, "confinement", f, "run");
    c.confinement = parse_confinement(f);
  }
  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    check_keys(t, {"growth", "tail"}, "thresholds");
    read(t, "growth", c.thresholds.growth, "thresholds");
    read(t, "tail", c.thresholds.tail, "thresholds");
  }
  read(j, "beta", c.beta, "run");
  read(j, "gns_budget", c.gns_budget, "run");
  return c;
}

json parse_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(Frame f) { return f == Frame::physical ? "physical" : "rescaled"; }

Frame parse_frame(std::string_view name) {
  if (name == "physical") return Frame::physical;
  if (name == "rescaled") return Frame::rescaled;
  throw ConfigError("unknown frame '" + std::string(name) + "' (physical, rescaled)");
}

std::string_view to_string(Confinement c) { return c == Confinement::characteristic ? "characteristic" : "product"; }

Confinement parse_confinement(std::string_view name) {
  if (name == "characteristic") return Confinement::characteristic;
  if (name == "product") return Confinement::product;
  throw ConfigError("unknown confinement '" + std::string(name) + "' (characteristic, product)");
}

Grid RunConfig::make_grid() const {
  try {
    return Grid(grid.n, grid.half_width);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

double RunConfig::effective_beta() const { return beta > 0.0 ? beta : default_beta(alpha); }

void RunConfig::validate() const {
  require(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
  require(std::isfinite(chi) && chi >= 0.0, "chi must be finite and >= 0");
  require(frame == Frame::physical || alpha == 1.0, "the rescaled frame is defined for alpha = 1 only");
  const Grid g = make_grid();
  require(std::isfinite(initial.mass) && initial.mass > 0.0, "initial.mass must be positive");
  require(std::isfinite(initial.scale) && initial.scale > 0.0, "initial.scale must be positive");
  require(std::isfinite(initial.center), "initial.center must be finite");
  try {
    control.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("control: ") + e.what());
  }
  require(control.max_steps >= 1, "control.max_steps must be >= 1");
  require(std::isfinite(horizon) && horizon >= 0.0, "horizon must be finite and >= 0");
  require(std::isfinite(observation_interval) && observation_interval > 0.0, "observation_interval must be positive");
  require(horizon / observation_interval <= 1e6, "more than 1e6 observations requested");
  require(thresholds.growth > 1.0, "thresholds.growth must exceed 1");
  require(thresholds.tail > 0.0 && thresholds.tail < 1.0, "thresholds.tail must lie in (0, 1)");
  require(beta == 0.0 || (alpha < 1.0 && beta > alpha / 2.0 && beta < 1.0),
          "beta must be 0 (default) or lie in (alpha/2, 1) with alpha < 1");
  require(gns_budget >= 1, "gns_budget must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  try {
    (void)synthesize_initial(initial, g);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("initial: ") + e.what());
  }
}

void SweepConfig::validate() const {
  require(!alphas.empty() && !masses.empty() && !scales.empty(), "sweep axes must be nonempty");
  require(parallelism >= 1, "parallelism must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  require(base.initial.scale > 0.0, "base initial.scale must be positive");
  for (double a : alphas) {
    for (double m : masses) {
      for (double s : scales) cell(a, m, s).validate();
    }
  }
}

RunConfig SweepConfig::cell(double alpha, double mass, double scale) const {
  RunConfig c = base;
  c.alpha = alpha;
  c.initial.mass = mass;
  c.initial.scale = scale;
  if (scale_grid_with_initial) c.grid.half_width = base.grid.half_width * scale / base.initial.scale;
  return c;
}

std::string to_json_string(const RunConfig& c) { return run_to_json(c).dump(2) + "\n"; }

std::string to_json_string(const SweepConfig& c) {
  json j{{"schema_version", kSchemaVersion},
         {"base", run_to_json(c.base)},
         {"axes", {{"alpha", c.alphas}, {"mass", c.masses}, {"scale", c.scales}}},
         {"parallelism", c.parallelism},
         {"scale_grid_with_initial", c.scale_grid_with_initial},
         {"output_dir", c.output_dir}};
  return j.dump(2) + "\n";
}

RunConfig parse_run_config(std::string_view text) { return run_from_json(parse_text(text)); }

SweepConfig parse_sweep_config(std::string_view text) {
  const json j = parse_text(text);
  check_version(j, "sweep config");
  check_keys(j, {"schema_version", "base", "axes", "parallelism", "scale_grid_with_initial", "output_dir"},
             "sweep config");
  require(j.contains("base"), "sweep config lacks base");
  require(j.contains("axes"), "sweep config lacks axes");
  SweepConfig s;
  s.base = run_from_json(j["base"]);
  const auto& ax = j["axes"];
  check_keys(ax, {"alpha", "mass", "scale"}, "axes");
  read(ax, "alpha", s.alphas, "axes");
  read(ax, "mass", s.masses, "axes");
  read(ax, "scale", s.scales, "axes");
  read(j, "parallelism", s.parallelism, "sweep");
  read(j, "scale_grid_with_initial", s.scale_grid_with_initial, "sweep");
  read(j, "output_dir", s.output_dir, "sweep");
  return s;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

SweepConfig load_sweep_config(const std::filesystem::path& path) { return parse_sweep_config(read_file(path)); }

}  // namespace fks
