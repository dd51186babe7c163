#include "isacsim/scene.hpp"

#include <algorithm>
#include <stdexcept>

namespace isacsim {

int grid_cell_of(const GridSpec& grid, const Position& p) {
  const int nx = grid.cells_x();
  const int ny = grid.cells_y();
  int i = static_cast<int>(std::floor((p.x - grid.area.x_min) / grid.resolution));
  int j = static_cast<int>(std::floor((p.y - grid.area.y_min) / grid.resolution));
  i = std::clamp(i, 0, nx - 1);
  j = std::clamp(j, 0, ny - 1);
  return 1 + j * nx + i;
}

Scene scene_from_counts(const SceneGenConfig& cfg, const GridSpec& grid,
                        const Position& bs, Rng& rng) {
  if (cfg.overlap_count > std::min(cfg.num_targets, cfg.num_scatterers)) {
    throw std::invalid_argument("overlap_count exceeds min(K, L)");
  }
  const auto grid_points = uniform_grid(grid);
  const int q_total = static_cast<int>(grid_points.size());
  const int distinct = cfg.num_targets + cfg.num_scatterers - cfg.overlap_count;
  if (distinct > q_total) throw std::invalid_argument("more entities than grid cells");

  Scene scene;
  // user drawn from its Gaussian prior, kept inside the area
  const double coord_sd = std::sqrt(cfg.sigma_p_sq / 2.0);
  scene.user = cfg.user_at_mean
                   ? cfg.user_mean
                   : grid.area.clamp({cfg.user_mean.x + coord_sd * rng.gaussian(),
                                      cfg.user_mean.y + coord_sd * rng.gaussian()});
  scene.time_offset = cfg.tau_bound > 0 ? rng.uniform(-cfg.tau_bound, cfg.tau_bound) : 0.0;

  const double min_sep = cfg.min_separation_cells * grid.resolution;
  std::vector<int> cells;       // 0-based cell indices of placed entities
  std::vector<Position> placed;
  placed.push_back(scene.user);  // user and BS keep entities at distance too
  placed.push_back(bs);

  const int kMaxTries = 4000;
  int tries = 0;
  while (static_cast<int>(cells.size()) < distinct) {
    if (++tries > kMaxTries) {
      throw std::runtime_error("scene generation: no placement satisfies the minimum separation");
    }
    const int cell = static_cast<int>(rng.below(static_cast<uint64_t>(q_total)));
    Position pos = grid_points[cell];
    if (!cfg.on_grid) {
      pos.x += rng.uniform(-0.5, 0.5) * grid.resolution;
      pos.y += rng.uniform(-0.5, 0.5) * grid.resolution;
    }
    bool ok = std::none_of(placed.begin(), placed.end(), [&](const Position& p) {
      return distance(p, pos) < min_sep;
    });
    if (!ok || std::find(cells.begin(), cells.end(), cell) != cells.end()) continue;
    cells.push_back(cell);
    placed.push_back(pos);
  }

  // first overlap_count positions are shared, then target-only, then
  // scatterer-only
  scene.supports.resize(q_total + 1);
  const size_t entity_offset = placed.size() - cells.size();
  auto add_entity = [&](std::vector<SceneEntity>& list, int idx,
                        std::vector<uint8_t>& branch) {
    SceneEntity e;
    e.pos = placed[entity_offset + idx];
    e.gain = rng.complex_gaussian(cfg.gain_var);
    e.grid_cell = cells[idx] + 1;
    branch[e.grid_cell] = 1;
    list.push_back(e);
  };
  for (int i = 0; i < cfg.overlap_count; ++i) {
    add_entity(scene.targets, i, scene.supports.s_r);
    add_entity(scene.scatterers, i, scene.supports.s_c);
  }
  for (int i = cfg.overlap_count; i < cfg.num_targets; ++i) {
    add_entity(scene.targets, i, scene.supports.s_r);
  }
  for (int i = cfg.num_targets; i < distinct; ++i) {
    add_entity(scene.scatterers, i, scene.supports.s_c);
  }

  scene.supports.s_c[0] = 1;  // LoS path always present
  scene.los_gain = rng.complex_gaussian(cfg.gain_var);
  if (cfg.bs_sees_user) {
    scene.supports.s_r[0] = 1;
    scene.user_radar_gain = rng.complex_gaussian(cfg.gain_var);
  }
  for (int q = 0; q <= q_total; ++q) {
    scene.supports.s[q] = (scene.supports.s_r[q] || scene.supports.s_c[q]) ? 1 : 0;
  }
  return scene;
}

}  // namespace isacsim
