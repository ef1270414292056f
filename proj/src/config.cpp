#include "angleaware/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace angleaware {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& where, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config: " + where + ": not a number: " + v);
  }
  return x;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cf;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                    ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    if (e.key.empty()) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  ": empty key");
    }
    cf.entries_.push_back(std::move(e));
  }
  return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  for (const Entry& e : entries_) {
    if (e.section == section && e.key == key) return true;
  }
  return false;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
  const Entry* last = nullptr;
  for (const Entry& e : entries_) {
    if (e.section == section && e.key == key) {
      e.used = true;
      last = &e;
    }
  }
  return last ? last->value : fallback;
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  return parse_double("[" + section + "] " + key, get_string(section, key, ""));
}

long long ConfigFile::get_int(const std::string& section,
                              const std::string& key, long long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config: [" + section + "] " + key +
                                ": not an integer: " + v);
  }
  return x;
}

unsigned long long ConfigFile::get_uint(const std::string& section,
                                        const std::string& key,
                                        unsigned long long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config: [" + section + "] " + key +
                                ": not an unsigned integer: " + v);
  }
  return x;
}

std::vector<std::string> ConfigFile::get_all(const std::string& section,
                                             const std::string& key) const {
  std::vector<std::string> out;
  for (const Entry& e : entries_) {
    if (e.section == section && e.key == key) {
      e.used = true;
      out.push_back(e.value);
    }
  }
  return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const Entry& e : entries_) {
    if (!e.used) out.push_back("[" + e.section + "] " + e.key);
  }
  return out;
}

ScenarioConfig scenario_from_text(const std::string& text) {
  const ConfigFile cf = ConfigFile::parse(text);
  ScenarioConfig cfg;

  GridSpec& g = cfg.grid;
  g.x_min = cf.get_double("grid", "x_min", g.x_min);
  g.x_max = cf.get_double("grid", "x_max", g.x_max);
  g.y_min = cf.get_double("grid", "y_min", g.y_min);
  g.y_max = cf.get_double("grid", "y_max", g.y_max);
  g.z_min = cf.get_double("grid", "z_min", g.z_min);
  g.z_max = cf.get_double("grid", "z_max", g.z_max);
  g.th_min = cf.get_double("grid", "theta_h_min", g.th_min);
  g.th_max = cf.get_double("grid", "theta_h_max", g.th_max);
  g.tv_min = cf.get_double("grid", "theta_v_min", g.tv_min);
  g.tv_max = cf.get_double("grid", "theta_v_max", g.tv_max);
  g.res_x = cf.get_double("grid", "res_x", g.res_x);
  g.res_y = cf.get_double("grid", "res_y", g.res_y);
  g.res_z = cf.get_double("grid", "res_z", g.res_z);
  g.res_th = cf.get_double("grid", "res_theta_h", g.res_th);
  g.res_tv = cf.get_double("grid", "res_theta_v", g.res_tv);

  CameraParams& c = cfg.camera;
  c.fov = cf.get_double("camera", "fov", c.fov);
  c.sigma1 = cf.get_double("camera", "sigma1", c.sigma1);
  c.sigma2 = cf.get_double("camera", "sigma2", c.sigma2);
  const std::string h1m = cf.get_string("camera", "h1_mode", "literal");
  if (h1m == "literal") {
    c.h1_mode = H1Mode::Literal;
  } else if (h1m == "clamped") {
    c.h1_mode = H1Mode::Clamped;
  } else {
    throw std::invalid_argument(
        "config: [camera] h1_mode: expected literal or clamped");
  }

  ControllerParams& k = cfg.ctrl;
  k.gamma = cf.get_double("controller", "gamma", k.gamma);
  k.a1 = cf.get_double("controller", "a1", k.a1);
  k.a2 = cf.get_double("controller", "a2", k.a2);
  k.delta = cf.get_double("controller", "delta", k.delta);
  k.epsilon = cf.get_double("controller", "epsilon", k.epsilon);
  k.phi_min = cf.get_double("controller", "phi_min", k.phi_min);
  k.phi_max = cf.get_double("controller", "phi_max", k.phi_max);
  k.vmax_xy = cf.get_double("controller", "vmax_xy", k.vmax_xy);
  k.vmax_gimbal = cf.get_double("controller", "vmax_gimbal", k.vmax_gimbal);
  const std::string xv = cf.get_string("controller", "xi1_variant", "gradient");
  if (xv == "gradient") {
    k.xi1_extra_perf = false;
  } else if (xv == "perf_weighted") {
    k.xi1_extra_perf = true;
  } else {
    throw std::invalid_argument(
        "config: [controller] xi1_variant: expected gradient or perf_weighted");
  }

  cfg.dt = cf.get_double("sim", "dt", cfg.dt);
  cfg.duration = cf.get_double("sim", "duration", cfg.duration);
  cfg.shooting_rate = cf.get_double("sim", "shooting_rate", cfg.shooting_rate);
  cfg.cover_threshold =
      cf.get_double("sim", "cover_threshold", cfg.cover_threshold);
  cfg.seed = cf.get_uint("sim", "seed", cfg.seed);
  cfg.workspace_margin =
      cf.get_double("sim", "workspace_margin", cfg.workspace_margin);
  cfg.snapshot_period =
      cf.get_double("sim", "snapshot_period", cfg.snapshot_period);
  cfg.workers = static_cast<int>(cf.get_int("sim", "workers", cfg.workers));
  cfg.psi0 = cf.get_double("sim", "psi0", cfg.psi0);
  const std::string mode = cf.get_string("sim", "mode", "gimbal");
  if (mode == "gimbal") {
    cfg.mode = ControlMode::Gimbal;
  } else if (mode == "baseline") {
    cfg.mode = ControlMode::FixedBaseline;
  } else {
    throw std::invalid_argument(
        "config: [sim] mode: expected gimbal or baseline");
  }

  cfg.n = static_cast<int>(cf.get_int("drones", "n", cfg.n));
  cfg.z_c = cf.get_double("drones", "z_c", cfg.z_c);
  cfg.initial.clear();
  for (const std::string& line : cf.get_all("drones", "drone")) {
    std::istringstream ss(line);
    double x, y, ph, pv;
    if (!(ss >> x >> y >> ph >> pv)) {
      throw std::invalid_argument(
          "config: [drones] drone: expected 'x y phi_h phi_v', got: " + line);
    }
    std::string rest;
    if (ss >> rest) {
      throw std::invalid_argument(
          "config: [drones] drone: trailing tokens in: " + line);
    }
    cfg.initial.emplace_back(x, y, ph, pv, cfg.z_c);
  }

  const std::vector<std::string> unknown = cf.unused_keys();
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const std::string& u : unknown) msg += " " + u;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

ScenarioConfig scenario_from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_text(ss.str());
}

std::string scenario_to_text(const ScenarioConfig& cfg) {
  std::ostringstream o;
  o << "[grid]\n";
  o << "x_min = " << fmt_double(cfg.grid.x_min) << "\n";
  o << "x_max = " << fmt_double(cfg.grid.x_max) << "\n";
  o << "y_min = " << fmt_double(cfg.grid.y_min) << "\n";
  o << "y_max = " << fmt_double(cfg.grid.y_max) << "\n";
  o << "z_min = " << fmt_double(cfg.grid.z_min) << "\n";
  o << "z_max = " << fmt_double(cfg.grid.z_max) << "\n";
  o << "theta_h_min = " << fmt_double(cfg.grid.th_min) << "\n";
  o << "theta_h_max = " << fmt_double(cfg.grid.th_max) << "\n";
  o << "theta_v_min = " << fmt_double(cfg.grid.tv_min) << "\n";
  o << "theta_v_max = " << fmt_double(cfg.grid.tv_max) << "\n";
  o << "res_x = " << fmt_double(cfg.grid.res_x) << "\n";
  o << "res_y = " << fmt_double(cfg.grid.res_y) << "\n";
  o << "res_z = " << fmt_double(cfg.grid.res_z) << "\n";
  o << "res_theta_h = " << fmt_double(cfg.grid.res_th) << "\n";
  o << "res_theta_v = " << fmt_double(cfg.grid.res_tv) << "\n";
  o << "\n[camera]\n";
  o << "fov = " << fmt_double(cfg.camera.fov) << "\n";
  o << "sigma1 = " << fmt_double(cfg.camera.sigma1) << "\n";
  o << "sigma2 = " << fmt_double(cfg.camera.sigma2) << "\n";
  o << "h1_mode = "
    << (cfg.camera.h1_mode == H1Mode::Clamped ? "clamped" : "literal") << "\n";
  o << "\n[controller]\n";
  o << "gamma = " << fmt_double(cfg.ctrl.gamma) << "\n";
  o << "a1 = " << fmt_double(cfg.ctrl.a1) << "\n";
  o << "a2 = " << fmt_double(cfg.ctrl.a2) << "\n";
  o << "delta = " << fmt_double(cfg.ctrl.delta) << "\n";
  o << "epsilon = " << fmt_double(cfg.ctrl.epsilon) << "\n";
  o << "phi_min = " << fmt_double(cfg.ctrl.phi_min) << "\n";
  o << "phi_max = " << fmt_double(cfg.ctrl.phi_max) << "\n";
  o << "vmax_xy = " << fmt_double(cfg.ctrl.vmax_xy) << "\n";
  o << "vmax_gimbal = " << fmt_double(cfg.ctrl.vmax_gimbal) << "\n";
  o << "xi1_variant = "
    << (cfg.ctrl.xi1_extra_perf ? "perf_weighted" : "gradient") << "\n";
  o << "\n[sim]\n";
  o << "dt = " << fmt_double(cfg.dt) << "\n";
  o << "duration = " << fmt_double(cfg.duration) << "\n";
  o << "shooting_rate = " << fmt_double(cfg.shooting_rate) << "\n";
  o << "cover_threshold = " << fmt_double(cfg.cover_threshold) << "\n";
  o << "mode = "
    << (cfg.mode == ControlMode::FixedBaseline ? "baseline" : "gimbal")
    << "\n";
  o << "seed = " << cfg.seed << "\n";
  o << "workspace_margin = " << fmt_double(cfg.workspace_margin) << "\n";
  o << "snapshot_period = " << fmt_double(cfg.snapshot_period) << "\n";
  o << "workers = " << cfg.workers << "\n";
  o << "psi0 = " << fmt_double(cfg.psi0) << "\n";
  o << "\n[drones]\n";
  o << "n = " << cfg.n << "\n";
  o << "z_c = " << fmt_double(cfg.z_c) << "\n";
  for (const DroneState& s : cfg.initial) {
    o << "drone = " << fmt_double(s.x) << " " << fmt_double(s.y) << " "
      << fmt_double(s.phi_h) << " " << fmt_double(s.phi_v) << "\n";
  }
  return o.str();
}

}  // namespace angleaware
