#include "validation.hpp"

#include <cmath>
#include <sstream>

#include "isacsim/harness.hpp"
#include "oracles.hpp"

namespace isacsim {

namespace {

std::string fmt_err(double err) {
  std::ostringstream os;
  os << "max err " << err;
  return os.str();
}

GaussianMessage random_message(int n, Rng& rng) {
  GaussianMessage m;
  m.mean.resize(n);
  m.var.resize(n);
  for (int i = 0; i < n; ++i) {
    m.mean(i) = rng.complex_gaussian(1.5);
    m.var(i) = rng.uniform(0.05, 2.0);
  }
  return m;
}

ValidationCheck check_module_b(uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  TurboControl ctrl;
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(2));  // 2 or 3
    const auto hyper = PriorHyperParams::uniform_slab(
        n, rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
        rng.uniform(0.05, 0.95), rng.uniform(0.5, 2.0));
    const auto pri_r = random_message(n, rng);
    const auto pri_c = random_message(n, rng);
    const auto got = module_b(pri_r, pri_c, hyper, SupportModel::kJoint, ctrl);
    const auto want = oracle::enumerate_posterior(pri_r, pri_c, hyper);
    worst = std::max(worst, (got.radar.mean - want.mean_r).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.comm.mean - want.mean_c).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.radar.var - want.var_r).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.comm.var - want.var_c).cwiseAbs().maxCoeff());
    worst = std::max(
        worst, (got.radar.support_prob - want.support_prob_r).cwiseAbs().maxCoeff());
    worst = std::max(
        worst, (got.comm.support_prob - want.support_prob_c).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.support_prob_joint - want.support_prob_joint)
                                .cwiseAbs()
                                .maxCoeff());
  }
  return {"support posterior vs enumeration", worst <= 1e-9, fmt_err(worst)};
}

ValidationCheck check_module_a(uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  TurboControl ctrl;
  for (int rep = 0; rep < 20; ++rep) {
    const int cols = 4 + static_cast<int>(rng.below(20));
    const int rows = cols + static_cast<int>(rng.below(2 * cols));
    Eigen::MatrixXcd phi(rows, cols);
    Eigen::VectorXcd y(rows);
    for (int i = 0; i < rows; ++i) {
      y(i) = rng.complex_gaussian(1.0);
      for (int j = 0; j < cols; ++j) phi(i, j) = rng.complex_gaussian(1.0);
    }
    const auto prior = random_message(cols, rng);
    const double noise_var = rng.uniform(0.01, 1.0);
    const auto got = lmmse_module_a(phi, y, noise_var, prior, ctrl, true);
    const auto want = oracle::gaussian_conditioning(phi, y, noise_var,
                                                    prior.mean, prior.var);
    worst = std::max(worst, (got.post_mean - want.mean).norm() / want.mean.norm());
    worst = std::max(worst, (got.post_cov - want.cov).norm() / want.cov.norm());
  }
  return {"lmmse vs direct gaussian conditioning", worst <= 1e-8, fmt_err(worst)};
}

ValidationCheck check_gradient(const ExperimentConfig& cfg) {
  // a posterior from a real trial, gradients evaluated for every column
  const auto data = make_trial(cfg, 0, 20.0);
  const auto setup = cfg.problem_setup();
  SensingParams params;
  params.grid = uniform_grid(setup.grid);
  params.user_pos = setup.grid.area.clamp(setup.prior.user_mean);
  params.time_offset = 0.0;

  const BranchModel radar = make_radar_model(params, data.pilots, setup.bs);
  const BranchModel comm = make_comm_model(params, data.pilots, setup.bs);
  const auto hyper = cfg.hyper_params();
  const auto state = turbo_estep({data.obs.y_r, radar, data.obs.noise_var_r},
                                 {data.obs.y_c, comm, data.obs.noise_var_c},
                                 hyper, SupportModel::kJoint,
                                 cfg.solver_config(SolverMode::kJoint).turbo);

  SurrogateContext ctx{data.obs.y_r,          data.obs.y_c,
                       state.dense_post_mean_r, state.dense_post_mean_c,
                       state.dense_post_cov_r,  state.dense_post_cov_c,
                       data.obs.noise_var_r,    data.obs.noise_var_c,
                       data.pilots,             setup.bs,
                       setup.grid.area,         setup.prior};

  std::vector<int> all_columns;
  for (int q = 1; q <= static_cast<int>(params.grid.size()); ++q) {
    all_columns.push_back(q);
  }
  const auto analytic = surrogate_gradient(params, ctx, all_columns);
  const auto fd = oracle::finite_difference_gradient(params, ctx);

  const double grid_err = (analytic.grad_grid - fd.grad_grid).norm() /
                          std::max(1e-300, fd.grad_grid.norm());
  const double user_err = (analytic.grad_user - fd.grad_user).norm() /
                          std::max(1e-300, fd.grad_user.norm());
  const double tau_err = std::abs(analytic.grad_tau - fd.grad_tau) /
                         std::max(1e-300, std::abs(fd.grad_tau));
  const double worst = std::max({grid_err, user_err, tau_err});
  return {"analytic gradient vs finite differences", worst <= 1e-5, fmt_err(worst)};
}

ValidationCheck check_representation(const ExperimentConfig& cfg) {
  ExperimentConfig on_grid_cfg = cfg;
  on_grid_cfg.on_grid = true;
  const auto setup = on_grid_cfg.problem_setup();
  Rng rng(derive_seed(on_grid_cfg.seed, 0xabcd, 7));
  const Scene scene =
      scene_from_counts(on_grid_cfg.scene_gen(), setup.grid, setup.bs.pos, rng);
  const PilotSet pilots = make_pilots(setup.bs.array, on_grid_cfg.subcarriers,
                                      on_grid_cfg.pilot_spacing, on_grid_cfg.f0,
                                      rng);

  SensingParams truth;
  truth.grid = uniform_grid(setup.grid);
  truth.user_pos = scene.user;
  truth.time_offset = scene.time_offset;

  const int cols = truth.num_columns();
  Eigen::VectorXcd x_r = Eigen::VectorXcd::Zero(cols);
  Eigen::VectorXcd x_c = Eigen::VectorXcd::Zero(cols);
  x_r(0) = scene.user_radar_gain;
  x_c(0) = scene.los_gain;
  for (const auto& t : scene.targets) x_r(t.grid_cell) = t.gain;
  for (const auto& s : scene.scatterers) x_c(s.grid_cell) = s.gain;

  const auto model_r = make_radar_model(truth, pilots, setup.bs);
  const auto model_c = make_comm_model(truth, pilots, setup.bs);
  const Eigen::VectorXcd sig_r = radar_signal(scene, pilots, setup.bs);
  const Eigen::VectorXcd sig_c = comm_signal(scene, pilots, setup.bs);

  const double err_r = (model_r.apply(x_r) - sig_r).norm() / sig_r.norm();
  const double err_c = (model_c.apply(x_c) - sig_c).norm() / sig_c.norm();
  const double worst = std::max(err_r, err_c);
  return {"on-grid representation consistency", worst <= 1e-10, fmt_err(worst)};
}

ValidationCheck check_kronecker(uint64_t seed) {
  ExperimentConfig small;
  small.area_width = 20;
  small.area_height = 20;
  small.resolution = 10;
  small.antennas = 2;
  small.subcarriers = 64;
  small.pilot_spacing = 32;
  small.bs_x = -10;
  small.bs_y = 0;
  small.user_mean_x = 5;
  small.user_mean_y = 2;
  const auto setup = small.problem_setup();
  Rng rng(seed);
  const PilotSet pilots = make_pilots(setup.bs.array, small.subcarriers,
                                      small.pilot_spacing, small.f0, rng);
  SensingParams params;
  params.grid = uniform_grid(setup.grid);
  params.user_pos = {5, 2};
  params.time_offset = 1e-8;

  const Eigen::MatrixXcd direct = radar_measurement_matrix(params, pilots, setup.bs);
  const Eigen::MatrixXcd big =
      oracle::kronecker_radar_dictionary(params, pilots, setup.bs);
  const int cols = params.num_columns();
  double worst = 0.0;
  for (int q = 0; q < cols; ++q) {
    worst = std::max(
        worst, (direct.col(q) - big.col(q * (cols + 1))).cwiseAbs().maxCoeff());
  }
  return {"radar dictionary vs kronecker column selection", worst <= 1e-12,
          fmt_err(worst)};
}

}  // namespace

std::vector<ValidationCheck> run_validation_checks(const ExperimentConfig& cfg) {
  std::vector<ValidationCheck> checks;
  checks.push_back(check_module_b(derive_seed(cfg.seed, 0xb, 0)));
  checks.push_back(check_module_a(derive_seed(cfg.seed, 0xa, 0)));
  checks.push_back(check_gradient(cfg));
  checks.push_back(check_representation(cfg));
  checks.push_back(check_kronecker(derive_seed(cfg.seed, 0xc, 0)));
  return checks;
}

}  // namespace isacsim
