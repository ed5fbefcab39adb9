#include "jamiton/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "jamiton/csv.hpp"
#include "jamiton/errors.hpp"

namespace jamiton::io {

namespace {

enum class Kind { real, count, integer, text, list };

struct Field {
  const char* key;
  Kind kind;
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

template <class T>
Field real(const char* key, T Scenario::*member) {
  return {key, Kind::real,
          [member](Scenario& s, const std::string& v) { s.*member = parse_double(v, "value"); },
          [member](const Scenario& s) { return format_double(s.*member); }};
}

Field param(const char* key, double model::ModelParams::*member) {
  return {key, Kind::real,
          [member](Scenario& s, const std::string& v) { s.params.*member = parse_double(v, "value"); },
          [member](const Scenario& s) { return format_double(s.params.*member); }};
}

Field count(const char* key, std::size_t Scenario::*member) {
  return {key, Kind::count,
          [member](Scenario& s, const std::string& v) {
            const double d = parse_double(v, "value");
            if (!(d >= 0.0) || d != std::floor(d) || d > 1e12) throw ConfigError("not a count");
            s.*member = static_cast<std::size_t>(d);
          },
          [member](const Scenario& s) { return std::to_string(s.*member); }};
}

Field text(const char* key, std::string Scenario::*member) {
  return {key, Kind::text, [member](Scenario& s, const std::string& v) { s.*member = v; },
          [member](const Scenario& s) { return s.*member; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(text("task", &Scenario::task));
    f.push_back(text("preset", &Scenario::preset));
    f.push_back(text("output_dir", &Scenario::output_dir));
    f.push_back(param("beta_m2ps2", &model::ModelParams::beta));
    f.push_back(param("rho_max_vpm", &model::ModelParams::rho_max));
    f.push_back(param("u0_mps", &model::ModelParams::u0));
    f.push_back(param("tau_s", &model::ModelParams::tau));
    f.push_back({"rho_minus_vpm", Kind::list,
                 [](Scenario& s, const std::string& v) {
                   s.rho_minus.clear();
                   std::istringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     const auto b = item.find_first_not_of(" \t");
                     const auto e = item.find_last_not_of(" \t");
                     item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
                     s.rho_minus.push_back(parse_double(item, "value"));
                   }
                 },
                 [](const Scenario& s) {
                   std::string out;
                   for (std::size_t i = 0; i < s.rho_minus.size(); ++i) {
                     if (i) out += ',';
                     out += format_double(s.rho_minus[i]);
                   }
                   return out;
                 }});
    f.push_back(real("wavelength_m", &Scenario::wavelength));
    f.push_back(real("ring_length_m", &Scenario::ring_length));
    f.push_back(real("mean_density_vpm", &Scenario::mean_density));
    f.push_back(count("n_particles_count", &Scenario::n_particles));
    f.push_back(real("cfl_nd", &Scenario::cfl));
    f.push_back(real("visc_coeff_nd", &Scenario::visc_coeff));
    f.push_back(real("visc_linear_nd", &Scenario::visc_linear));
    f.push_back({"mode_count", Kind::integer,
                 [](Scenario& s, const std::string& v) {
                   const double d = parse_double(v, "value");
                   if (d != std::floor(d) || std::abs(d) > 1e6) throw ConfigError("not an integer");
                   s.mode = static_cast<int>(d);
                 },
                 [](const Scenario& s) { return std::to_string(s.mode); }});
    f.push_back(real("amplitude_frac", &Scenario::amplitude));
    f.push_back(real("t_end_s", &Scenario::t_end));
    f.push_back(real("output_every_s", &Scenario::output_every));
    f.push_back(count("snapshot_points_count", &Scenario::snapshot_points));
    f.push_back(text("traj_source", &Scenario::traj_source));
    f.push_back(count("tracers_count", &Scenario::tracers));
    f.push_back(real("traj_duration_s", &Scenario::traj_duration));
    f.push_back(count("traj_samples_count", &Scenario::traj_samples));
    f.push_back(real("traj_window_s", &Scenario::traj_window));
    f.push_back(real("traj_dt_s", &Scenario::traj_dt));
    f.push_back(count("traj_grid_count", &Scenario::traj_grid));
    f.push_back(text("sim_dir", &Scenario::sim_dir));
    f.push_back(count("waves_count", &Scenario::waves));
    f.push_back(real("shock_exclusion_m", &Scenario::shock_exclusion));
    f.push_back(count("grid_points_count", &Scenario::grid_points));
    f.push_back(real("threshold_nd", &Scenario::threshold));
    f.push_back(count("compare_window_count", &Scenario::compare_window));
    f.push_back(real("sweep_lo_vpm", &Scenario::sweep_lo));
    f.push_back(real("sweep_hi_vpm", &Scenario::sweep_hi));
    f.push_back(count("sweep_points_count", &Scenario::sweep_points));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return &f;
  return nullptr;
}

bool has_unit_suffix(const std::string& key) {
  static const char* suffixes[] = {"_m", "_s", "_mps", "_vpm", "_m2ps2", "_count", "_frac", "_nd"};
  for (const char* sfx : suffixes) {
    const std::string s(sfx);
    if (key.size() > s.size() && key.compare(key.size() - s.size(), s.size(), s) == 0) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool uses_ring(const std::string& task) {
  return task == "sim" || task == "compare" || task == "traj" || task == "train";
}

// Line of each key for error messages; empty for built-in scenarios.
using LineMap = std::map<std::string, std::string>;

void check(bool ok, const LineMap& lines, const std::string& key, const std::string& msg) {
  if (ok) return;
  const auto it = lines.find(key);
  const std::string where = it == lines.end() ? "" : " (" + it->second + ")";
  throw ConfigError("key '" + key + "'" + where + ": " + msg);
}

void validate_with_lines(const Scenario& s, const LineMap& lines) {
  static const char* tasks[] = {"solve", "train", "stability", "sim", "traj", "compare", "sweep"};
  check(std::find_if(std::begin(tasks), std::end(tasks),
                     [&](const char* t) { return s.task == t; }) != std::end(tasks),
        lines, "task", "unknown task '" + s.task + "'");
  auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
  const auto& p = s.params;
  check(pos(p.beta), lines, "beta_m2ps2", "must be positive");
  check(pos(p.rho_max), lines, "rho_max_vpm", "must be positive");
  check(pos(p.u0), lines, "u0_mps", "must be positive");
  check(pos(p.tau), lines, "tau_s", "must be positive");
  for (double r : s.rho_minus) {
    check(r > 0.0 && r < p.rho_max, lines, "rho_minus_vpm",
          "densities must lie in (0, rho_max_vpm)");
  }
  if (s.task == "solve" || (s.task == "traj" && s.traj_source == "analytic") ||
      (s.task == "train" && s.wavelength > 0.0)) {
    check(!s.rho_minus.empty(), lines, "rho_minus_vpm", "required by task " + s.task);
  }
  check(s.wavelength >= 0.0 && std::isfinite(s.wavelength), lines, "wavelength_m",
        "must be >= 0");
  check(s.traj_source == "analytic" || s.traj_source == "sim", lines, "traj_source",
        "must be analytic or sim");
  check(s.shock_exclusion >= 0.0, lines, "shock_exclusion_m", "must be >= 0");
  check(s.grid_points >= 16, lines, "grid_points_count", "must be >= 16");
  check(s.threshold > 0.0, lines, "threshold_nd", "must be positive");
  check(s.compare_window >= 2, lines, "compare_window_count", "must be >= 2");
  check(s.tracers >= 1, lines, "tracers_count", "must be >= 1");
  check(s.traj_samples >= 2, lines, "traj_samples_count", "must be >= 2");
  check(pos(s.traj_duration), lines, "traj_duration_s", "must be positive");
  check(pos(s.traj_window), lines, "traj_window_s", "must be positive");
  check(pos(s.traj_dt), lines, "traj_dt_s", "must be positive");
  check(s.traj_grid >= 16, lines, "traj_grid_count", "must be >= 16");
  if (s.task == "sweep") {
    check(s.sweep_lo > 0.0 && s.sweep_lo < p.rho_max, lines, "sweep_lo_vpm",
          "must lie in (0, rho_max_vpm)");
    check(s.sweep_hi > s.sweep_lo && s.sweep_hi < p.rho_max, lines, "sweep_hi_vpm",
          "must lie in (sweep_lo_vpm, rho_max_vpm)");
    check(s.sweep_points >= 2, lines, "sweep_points_count", "must be >= 2");
  }
  if (uses_ring(s.task)) {
    check(pos(s.ring_length), lines, "ring_length_m", "must be positive");
    check(s.mean_density > 0.0 && s.mean_density < p.rho_max, lines, "mean_density_vpm",
          "must lie in (0, rho_max_vpm)");
  }
  if (s.task == "sim" || (s.task == "traj" && s.traj_source == "sim")) {
    // Map SimConfig's own checks back to the scenario keys.
    static const std::pair<const char*, const char*> owners[] = {
        {"n_particles", "n_particles_count"}, {"vehicle count", "n_particles_count"},
        {"base density", "mean_density_vpm"}, {"cfl", "cfl_nd"},
        {"visc_coeff", "visc_coeff_nd"},      {"visc_linear", "visc_linear_nd"},
        {"mode", "mode_count"},               {"amplitude", "amplitude_frac"},
        {"t_end", "t_end_s"},                 {"output_every", "output_every_s"},
        {"ring_length", "ring_length_m"},     {"mass per particle", "mean_density_vpm"}};
    try {
      s.sim_config().validate(p);
    } catch (const ConfigError& e) {
      std::string key = "n_particles_count";
      for (const auto& [needle, owner] : owners) {
        if (e.detail().find(needle) != std::string::npos) {
          key = owner;
          break;
        }
      }
      check(false, lines, key, e.detail());
    }
    check(s.amplitude < 1.0, lines, "amplitude_frac", "must be < 1");
  }
}

}  // namespace

sim::SimConfig Scenario::sim_config() const {
  sim::SimConfig c = sim::ring_config(n_particles, ring_length, mean_density);
  c.cfl = cfl;
  c.visc_coeff = visc_coeff;
  c.visc_linear = visc_linear;
  c.mode = mode;
  c.amplitude = amplitude;
  c.t_end = t_end;
  c.output_every = output_every;
  c.snapshot_points = snapshot_points;
  return c;
}

Scenario parse_scenario(const std::string& text, const std::string& source,
                        const std::string& task) {
  Scenario s;
  LineMap lines;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::vector<std::pair<const Field*, std::string>> assignments;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) {
      if (!has_unit_suffix(key)) {
        throw ConfigError("key '" + key + "' (" + where + "): missing unit suffix");
      }
      throw ConfigError("key '" + key + "' (" + where + "): unknown key");
    }
    if (lines.count(key)) throw ConfigError("key '" + key + "' (" + where + "): duplicate key");
    lines[key] = "line " + std::to_string(lineno) + " of " + source;
    assignments.emplace_back(f, value);
  }
  // A preset supplies defaults; explicit keys override it wherever they appear.
  for (const auto& [f, value] : assignments) {
    if (std::string(f->key) == "preset" && !value.empty()) {
      try {
        s = preset_scenario(value);
      } catch (const ConfigError& e) {
        check(false, lines, "preset", e.detail());
      }
    }
  }
  for (const auto& [f, value] : assignments) {
    try {
      f->set(s, value);
    } catch (const ConfigError& e) {
      check(false, lines, f->key, e.detail().empty() ? "invalid value '" + value + "'" : e.detail());
    }
  }
  if (!task.empty()) s.task = task;
  validate_with_lines(s, lines);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::string& task) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string(), task);
}

std::vector<std::string> preset_names() { return {"paper-fig1", "paper-fig3", "sugiyama-ring"}; }

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.preset = name;
  s.params = model::canonical_params();
  const double R = s.params.rho_max;
  if (name == "paper-fig1") {
    s.task = "solve";
    s.rho_minus = {0.1 * R, 0.2 * R, 0.3 * R, 0.4 * R, 0.5 * R};
  } else if (name == "paper-fig3") {
    s.task = "traj";
    s.rho_minus = {0.35 * R};
    s.traj_source = "analytic";
    s.tracers = 20;
  } else if (name == "sugiyama-ring") {
    s.task = "sim";
    s.ring_length = 230.0;
    s.mean_density = 22.0 / 230.0;
    s.n_particles = 2500;
    s.t_end = 300.0;
    s.output_every = 1.0;
    s.tracers = 22;
    s.traj_source = "sim";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(s);
    out += '\n';
  }
  return out;
}

void validate_scenario(const Scenario& s) { validate_with_lines(s, {}); }

}  // namespace jamiton::io
