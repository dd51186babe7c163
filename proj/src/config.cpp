#include "isacsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace isacsim {

SceneGenConfig ExperimentConfig::scene_gen() const {
  SceneGenConfig g;
  g.num_targets = num_targets;
  g.num_scatterers = num_scatterers;
  g.overlap_count = overlap;
  g.on_grid = on_grid;
  g.bs_sees_user = bs_sees_user;
  g.min_separation_cells = min_separation_cells;
  g.gain_var = gain_var;
  g.tau_bound = tau_bound();
  g.user_mean = {user_mean_x, user_mean_y};
  g.sigma_p_sq = sigma_p_sq;
  g.user_at_mean = user_at_mean;
  return g;
}

double ExperimentConfig::resolved_lambda() const {
  if (lambda >= 0) return lambda;
  const int q = grid_spec().num_points();
  return std::min(1.0, double(num_targets + num_scatterers - overlap) / q);
}

double ExperimentConfig::resolved_rho_r() const {
  if (rho_r >= 0) return rho_r;
  return double(num_targets) / (num_targets + num_scatterers - overlap + 1);
}

double ExperimentConfig::resolved_rho_c() const {
  if (rho_c >= 0) return rho_c;
  return double(num_scatterers) / (num_targets + num_scatterers - overlap + 1);
}

PriorHyperParams ExperimentConfig::hyper_params() const {
  const int cols = grid_spec().num_points() + 1;
  return PriorHyperParams::uniform_slab(cols, resolved_lambda(),
                                        resolved_rho_r(), resolved_rho_c(),
                                        slab_var);
}

SolverConfig ExperimentConfig::solver_config(SolverMode mode) const {
  SolverConfig s;
  s.mode = mode;
  s.em_max_iters = em_max_iters;
  s.em_tol = em_tol;
  s.turbo.max_iters = turbo_max_iters;
  s.turbo.tol = turbo_tol;
  s.turbo.damping = damping;
  s.detection_threshold = detection_threshold;
  s.active_threshold = active_threshold;
  s.collision_radius = collision_cells * resolution;
  s.step_pos = step_pos;
  s.step_tau = step_tau > 0 ? step_tau : 1.0 / (10.0 * bandwidth());
  s.step_decay = step_decay;
  s.armijo_c1 = armijo_c1;
  s.armijo_shrink = armijo_shrink;
  s.armijo_max_backtracks = armijo_max_backtracks;
  return s;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (snr_db.empty()) throw std::invalid_argument("snr_db must be non-empty");
  if (methods.empty()) throw std::invalid_argument("methods must be non-empty");
  for (const auto& m : methods) {
    if (m != "omp" && m != "fixed_grid" && m != "separate" && m != "joint") {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
  if (antennas < 1 || subcarriers < 1 || f0 <= 0 || pilot_spacing < 1) {
    throw std::invalid_argument("signal parameters must be positive");
  }
  if (pilot_spacing > subcarriers) {
    throw std::invalid_argument("pilot_spacing exceeds the subcarrier count");
  }
  if (sigma_p_sq <= 0 || gain_var <= 0 || slab_var <= 0) {
    throw std::invalid_argument("variances must be positive");
  }
  if (overlap > std::min(num_targets, num_scatterers) || overlap < 0) {
    throw std::invalid_argument("overlap must lie in [0, min(K, L)]");
  }
  if (detection_threshold <= 0 || detection_threshold >= 1) {
    throw std::invalid_argument("detection_threshold must lie in (0,1)");
  }
  (void)grid_spec();  // throws if the resolution does not divide the area
}

ExperimentConfig quick_preset() { return {}; }

ExperimentConfig paper_preset() {
  ExperimentConfig c;
  c.area_width = 100;
  c.area_height = 100;
  c.resolution = 5;
  c.bs_x = -50;
  c.bs_y = 0;
  c.user_mean_x = 50;
  c.user_mean_y = 0;
  c.num_targets = 9;
  c.num_scatterers = 10;
  c.overlap = 5;
  c.antennas = 64;
  c.subcarriers = 1024;
  c.f0 = 30e3;
  c.pilot_spacing = 32;
  c.min_separation_cells = 2.0;
  return c;
}

ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "quick") return quick_preset();
  if (name == "paper") return paper_preset();
  throw std::invalid_argument("unknown preset '" + name + "' (quick|paper)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& section,
                        const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  auto as_d = [&] { return std::stod(value); };
  auto as_i = [&] { return std::stoi(value); };
  auto as_b = [&] { return parse_bool(value, full); };

  if (full == "experiment.seed") cfg.seed = std::stoull(value);
  else if (full == "experiment.trials") cfg.trials = as_i();
  else if (full == "experiment.snr_db") {
    cfg.snr_db.clear();
    for (const auto& s : split_list(value)) cfg.snr_db.push_back(std::stod(s));
  } else if (full == "experiment.methods") cfg.methods = split_list(value);
  else if (full == "experiment.workers") cfg.workers = as_i();
  else if (full == "experiment.out_dir") cfg.out_dir = value;
  else if (full == "experiment.svg") cfg.svg = as_b();
  else if (full == "scene.area_width") cfg.area_width = as_d();
  else if (full == "scene.area_height") cfg.area_height = as_d();
  else if (full == "scene.resolution") cfg.resolution = as_d();
  else if (full == "scene.bs_x") cfg.bs_x = as_d();
  else if (full == "scene.bs_y") cfg.bs_y = as_d();
  else if (full == "scene.user_mean_x") cfg.user_mean_x = as_d();
  else if (full == "scene.user_mean_y") cfg.user_mean_y = as_d();
  else if (full == "scene.sigma_p_sq") cfg.sigma_p_sq = as_d();
  else if (full == "scene.targets") cfg.num_targets = as_i();
  else if (full == "scene.scatterers") cfg.num_scatterers = as_i();
  else if (full == "scene.overlap") cfg.overlap = as_i();
  else if (full == "scene.on_grid") cfg.on_grid = as_b();
  else if (full == "scene.user_at_mean") cfg.user_at_mean = as_b();
  else if (full == "scene.bs_sees_user") cfg.bs_sees_user = as_b();
  else if (full == "scene.min_separation_cells") cfg.min_separation_cells = as_d();
  else if (full == "scene.gain_var") cfg.gain_var = as_d();
  else if (full == "signal.antennas") cfg.antennas = as_i();
  else if (full == "signal.subcarriers") cfg.subcarriers = as_i();
  else if (full == "signal.f0") cfg.f0 = as_d();
  else if (full == "signal.pilot_spacing") cfg.pilot_spacing = as_i();
  else if (full == "signal.tau_bound_factor") cfg.tau_bound_factor = as_d();
  else if (full == "signal.enable_time_offset") cfg.enable_time_offset = as_b();
  else if (full == "prior.lambda") cfg.lambda = as_d();
  else if (full == "prior.rho_r") cfg.rho_r = as_d();
  else if (full == "prior.rho_c") cfg.rho_c = as_d();
  else if (full == "prior.slab_var") cfg.slab_var = as_d();
  else if (full == "turbo.max_iters") cfg.turbo_max_iters = as_i();
  else if (full == "turbo.tol") cfg.turbo_tol = as_d();
  else if (full == "turbo.damping") cfg.damping = as_d();
  else if (full == "solver.em_max_iters") cfg.em_max_iters = as_i();
  else if (full == "solver.em_tol") cfg.em_tol = as_d();
  else if (full == "solver.detection_threshold") cfg.detection_threshold = as_d();
  else if (full == "mstep.active_threshold") cfg.active_threshold = as_d();
  else if (full == "mstep.step_pos") cfg.step_pos = as_d();
  else if (full == "mstep.step_tau") cfg.step_tau = as_d();
  else if (full == "mstep.step_decay") cfg.step_decay = as_d();
  else if (full == "mstep.armijo_c1") cfg.armijo_c1 = as_d();
  else if (full == "mstep.armijo_shrink") cfg.armijo_shrink = as_d();
  else if (full == "mstep.armijo_max_backtracks") cfg.armijo_max_backtracks = as_i();
  else if (full == "mstep.collision_cells") cfg.collision_cells = as_d();
  else if (full == "omp.known_counts") cfg.omp_known_counts = as_b();
  else if (full == "omp.residual_tol") cfg.omp_residual_tol = as_d();
  else {
    throw std::invalid_argument("unknown config key '" + full + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  // first pass: collect (section, key, value) in file order
  std::vector<std::array<std::string, 3>> entries;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value' inside a section");
    }
    entries.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }

  ExperimentConfig cfg;
  for (const auto& e : entries) {
    if (e[0] == "experiment" && e[1] == "preset") {
      cfg = preset_by_name(e[2]);
    }
  }
  for (const auto& e : entries) {
    if (e[0] == "experiment" && e[1] == "preset") continue;
    try {
      apply_config_entry(cfg, e[0], e[1], e[2]);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& ex) {
      throw std::invalid_argument(origin + ": bad value for '" + e[0] + "." +
                                  e[1] + "': " + ex.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace isacsim
