#pragma once

#include <complex>
#include <vector>

#include "isacsim/geometry.hpp"
#include "isacsim/prior.hpp"

namespace isacsim {

/// One propagation entity: a radar target or a communication scatterer.
struct SceneEntity {
  Position pos;
  std::complex<double> gain;
  int grid_cell = -1;  // column index (1..Q) of the generating-grid cell
};

/// Ground truth for one trial.
struct Scene {
  Position user;
  std::complex<double> user_radar_gain{0.0, 0.0};  // echo gain of the user; 0 if unseen
  std::complex<double> los_gain{0.0, 0.0};
  std::vector<SceneEntity> targets;     // radar targets, excludes the user
  std::vector<SceneEntity> scatterers;  // NLoS scatterers, excludes the LoS path
  double time_offset = 0.0;             // receive-side timing error, seconds
  SupportTriple supports;               // over the generating grid, index 0 = user/LoS
};

struct SceneGenConfig {
  int num_targets = 3;      // K
  int num_scatterers = 4;   // L
  int overlap_count = 0;    // entities shared between the two sets
  bool on_grid = false;     // place entities exactly at cell centers
  bool bs_sees_user = true; // whether the echo contains a user term
  double min_separation_cells = 2.0;
  double gain_var = 1.0;
  double tau_bound = 0.0;       // time offset drawn uniformly in +/- this
  Position user_mean{0.0, 0.0}; // Gaussian prior mean of the user position
  double sigma_p_sq = 1.0;      // total user prior variance (sigma_p^2)
  bool user_at_mean = false;    // pin the user to the prior mean (exactness tests)
};

/// Places overlap_count shared positions plus disjoint remainders on randomly
/// chosen grid cells with a minimum pairwise separation (user included), then
/// assigns complex Gaussian gains and draws the time offset.
/// Throws std::runtime_error when no feasible placement is found.
Scene scene_from_counts(const SceneGenConfig& cfg, const GridSpec& grid,
                        const Position& bs, Rng& rng);

/// Column index (0..Q) of the generating-grid cell containing `p`;
/// 0 is reserved for the user, cells are 1-based.
int grid_cell_of(const GridSpec& grid, const Position& p);

}  // namespace isacsim
