#include "isacsim/solver.hpp"

#include <algorithm>
#include <cmath>

namespace isacsim {

std::pair<std::vector<Eigen::MatrixXcd>, std::vector<Eigen::VectorXcd>>
reconstruct_channels(const Eigen::VectorXcd& x_r, const Eigen::VectorXcd& x_c,
                     const SensingParams& params, const PilotSet& pilots,
                     const BaseStation& bs) {
  const Eigen::MatrixXcd basis = sparse_basis(params, bs);
  std::vector<Eigen::MatrixXcd> hr;
  std::vector<Eigen::VectorXcd> hc;
  hr.reserve(pilots.count());
  hc.reserve(pilots.count());
  for (int j = 0; j < pilots.count(); ++j) {
    const auto [dr, dc] =
        delay_diagonals(params, bs, pilots.subcarrier_indices[j], pilots.f0);
    const Eigen::VectorXcd xr_eff = dr.cwiseProduct(x_r);
    const Eigen::VectorXcd xc_eff = dc.cwiseProduct(x_c);
    hr.push_back(basis * xr_eff.asDiagonal() * basis.transpose());
    hc.push_back(basis * xc_eff);
  }
  return {std::move(hr), std::move(hc)};
}

namespace {

double params_change(const SensingParams& a, const SensingParams& b) {
  double delta = std::abs(a.time_offset - b.time_offset) * kSpeedOfLight;
  delta = std::max(delta, distance(a.user_pos, b.user_pos));
  for (size_t q = 0; q < a.grid.size(); ++q) {
    delta = std::max(delta, distance(a.grid[q], b.grid[q]));
  }
  return delta;
}

}  // namespace

Estimates solve(const Observation& obs, const PilotSet& pilots,
                const ProblemSetup& setup, const PriorHyperParams& hyper,
                const SolverConfig& cfg) {
  Estimates est;
  const SupportModel support_model = cfg.mode == SolverMode::kSeparate
                                         ? SupportModel::kSeparate
                                         : SupportModel::kJoint;

  SensingParams params;
  params.grid = uniform_grid(setup.grid);
  params.user_pos = setup.grid.area.clamp(setup.prior.user_mean);
  params.time_offset = 0.0;
  const int qn = static_cast<int>(params.grid.size());

  auto run_estep = [&](const SensingParams& p) {
    const BranchModel radar = make_radar_model(p, pilots, setup.bs);
    const BranchModel comm = make_comm_model(p, pilots, setup.bs);
    return turbo_estep({obs.y_r, radar, obs.noise_var_r},
                       {obs.y_c, comm, obs.noise_var_c}, hyper, support_model,
                       cfg.turbo);
  };

  PosteriorState state;
  double step_pos = cfg.step_pos;
  double step_tau = cfg.step_tau;

  for (int iter = 0; iter < cfg.em_max_iters; ++iter) {
    est.em_iters = iter + 1;
    state = run_estep(params);
    if (cfg.mode == SolverMode::kFixedGrid) break;

    SurrogateContext ctx{obs.y_r,
                         obs.y_c,
                         state.dense_post_mean_r,
                         state.dense_post_mean_c,
                         state.dense_post_cov_r,
                         state.dense_post_cov_c,
                         obs.noise_var_r,
                         obs.noise_var_c,
                         pilots,
                         setup.bs,
                         setup.grid.area,
                         setup.prior};

    std::vector<int> active;
    for (int q = 1; q <= qn; ++q) {
      if (state.support_prob_joint(q) > cfg.active_threshold) active.push_back(q);
    }
    if (cfg.max_active > 0 && static_cast<int>(active.size()) > cfg.max_active) {
      // keep the most energetic columns; saturated probabilities don't rank
      auto energy = [&](int q) {
        return std::norm(state.x_mean_r(q)) / obs.noise_var_r +
               std::norm(state.x_mean_c(q)) / obs.noise_var_c;
      };
      std::sort(active.begin(), active.end(),
                [&](int a, int b) { return energy(a) > energy(b); });
      active.resize(cfg.max_active);
      std::sort(active.begin(), active.end());
    }
    if (cfg.collision_radius > 0) {
      active = filter_colliding_columns(active, params, state.support_prob_joint,
                                        cfg.collision_radius);
    }

    const SurrogateGradient grads = surrogate_gradient(params, ctx, active);
    ArmijoParams rule;
    rule.c1 = cfg.armijo_c1;
    rule.shrink = cfg.armijo_shrink;
    rule.max_backtracks = cfg.armijo_max_backtracks;
    rule.step_pos = step_pos;
    rule.step_tau = step_tau;
    const AscentResult ascent = armijo_ascent(params, grads, ctx, rule);
    est.surrogate_steps.push_back({ascent.value_before, ascent.value_after});

    const double delta = params_change(ascent.params, params);
    params = ascent.params;
    step_pos *= cfg.step_decay;
    step_tau *= cfg.step_decay;
    if (delta < cfg.em_tol) break;
  }

  if (cfg.mode != SolverMode::kFixedGrid) state = run_estep(params);

  est.estep_converged = state.converged;
  est.params = params;
  est.user_pos = params.user_pos;
  est.time_offset = params.time_offset;
  est.x_mmse_r = state.x_mean_r;
  est.x_mmse_c = state.x_mean_c;
  est.support_prob_r = state.support_prob_r;
  est.support_prob_c = state.support_prob_c;

  est.support.resize(qn + 1);
  for (int q = 0; q <= qn; ++q) {
    est.support.s_r[q] = state.support_prob_r(q) > cfg.detection_threshold;
    est.support.s_c[q] = state.support_prob_c(q) > cfg.detection_threshold;
    est.support.s[q] = est.support.s_r[q] || est.support.s_c[q];
    if (q == 0) continue;
    if (est.support.s_r[q]) {
      est.targets.push_back({params.grid[q - 1], state.x_mean_r(q),
                             state.support_prob_r(q), q});
    }
    if (est.support.s_c[q]) {
      est.scatterers.push_back({params.grid[q - 1], state.x_mean_c(q),
                                state.support_prob_c(q), q});
    }
  }

  auto [hr, hc] = reconstruct_channels(state.x_mean_r, state.x_mean_c, params,
                                       pilots, setup.bs);
  est.channel_r = std::move(hr);
  est.channel_c = std::move(hc);
  return est;
}

}  // namespace isacsim
