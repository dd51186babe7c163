#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "isacsim/baselines.hpp"
#include "isacsim/scene.hpp"
#include "isacsim/solver.hpp"

namespace isacsim {

/// Every tunable of an experiment, grouped the way the INI config file is.
/// `quick_preset()` and `paper_preset()` return ready-to-run baselines; any
/// field can be overridden from a config file.
struct ExperimentConfig {
  // [experiment]
  uint64_t seed = 1;
  int trials = 100;
  std::vector<double> snr_db = {0, 10, 20, 30};
  std::vector<std::string> methods = {"omp", "fixed_grid", "separate", "joint"};
  int workers = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";
  bool svg = false;

  // [scene]
  double area_width = 50.0;
  double area_height = 50.0;
  double resolution = 10.0;
  // BS and user sit between cell-center rows: a lattice row collinear with
  // the BS would make its steering columns near-identical
  double bs_x = -25.0;
  double bs_y = 5.0;
  double user_mean_x = 20.0;
  double user_mean_y = 5.0;
  double sigma_p_sq = 1.0;
  int num_targets = 3;
  int num_scatterers = 4;
  int overlap = 3;
  bool on_grid = false;
  bool user_at_mean = false;
  bool bs_sees_user = true;
  double min_separation_cells = 1.0;  // 10 m; the paper preset uses 2 cells
  double gain_var = 1.0;

  // [signal]
  int antennas = 16;
  int subcarriers = 256;
  double f0 = 60e3;  // wider spacing keeps 8 pilots delay-resolvable at d = 10 m
  int pilot_spacing = 32;
  double tau_bound_factor = 2.0;  // time offset box is +-factor/bandwidth
  bool enable_time_offset = true;

  // [prior] -- negative values are derived from the scene counts
  double lambda = -1.0;
  double rho_r = -1.0;
  double rho_c = -1.0;
  double slab_var = 1.0;

  // [turbo]
  int turbo_max_iters = 20;
  double turbo_tol = 1e-6;
  double damping = 0.5;

  // [solver]
  int em_max_iters = 30;
  double em_tol = 1e-3;
  double detection_threshold = 0.5;

  // [mstep]
  double active_threshold = 0.1;
  double step_pos = 1.0;
  double step_tau = -1.0;  // <0: derived as 1/(10 * bandwidth)
  double step_decay = 0.8;
  double armijo_c1 = 1e-4;
  double armijo_shrink = 0.5;
  int armijo_max_backtracks = 20;
  double collision_cells = 0.1;

  // [omp]
  bool omp_known_counts = true;
  double omp_residual_tol = 1e-3;

  // derived quantities
  double bandwidth() const { return subcarriers * f0; }
  double tau_bound() const {
    return enable_time_offset ? tau_bound_factor / bandwidth() : 0.0;
  }
  Rect area() const {
    return {-area_width / 2, -area_height / 2, area_width, area_height};
  }
  GridSpec grid_spec() const { return GridSpec(area(), resolution); }
  BaseStation base_station() const {
    return {{bs_x, bs_y}, ArrayGeometry(antennas)};
  }
  SensingPrior sensing_prior() const {
    return {{user_mean_x, user_mean_y}, sigma_p_sq, tau_bound()};
  }
  ProblemSetup problem_setup() const {
    return {base_station(), grid_spec(), sensing_prior()};
  }
  SceneGenConfig scene_gen() const;
  PriorHyperParams hyper_params() const;
  SolverConfig solver_config(SolverMode mode) const;
  double resolved_lambda() const;
  double resolved_rho_r() const;
  double resolved_rho_c() const;

  void validate() const;  // throws std::invalid_argument on bad settings
};

ExperimentConfig quick_preset();
ExperimentConfig paper_preset();
ExperimentConfig preset_by_name(const std::string& name);

/// Parses the INI-style config file. A `preset` key in [experiment] selects
/// the base configuration; every other key overrides one field. Unknown
/// sections or keys are errors.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& origin);

/// Applies one "section.key = value" override; used by the loader and tests.
void apply_config_entry(ExperimentConfig& cfg, const std::string& section,
                        const std::string& key, const std::string& value);

}  // namespace isacsim
