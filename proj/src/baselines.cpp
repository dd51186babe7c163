#include "isacsim/baselines.hpp"

#include <stdexcept>

namespace isacsim {

OmpResult omp(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& phi,
              const OmpConfig& cfg) {
  const int cols = static_cast<int>(phi.cols());
  const Eigen::VectorXd col_norms = phi.colwise().norm();
  if ((col_norms.array() == 0).any()) {
    throw std::invalid_argument("omp: dictionary has a zero column");
  }

  OmpResult res;
  res.coefficients = Eigen::VectorXcd::Zero(cols);
  const double y_norm = y.norm();
  if (y_norm == 0) return res;

  const int budget = cfg.max_atoms > 0 ? std::min(cfg.max_atoms, cols) : cols;
  Eigen::VectorXcd residual = y;
  std::vector<bool> picked(cols, false);
  Eigen::MatrixXcd sub(y.size(), 0);

  for (int k = 0; k < budget; ++k) {
    // normalized correlation
    Eigen::VectorXd score =
        (phi.adjoint() * residual).cwiseAbs().cwiseQuotient(col_norms);
    for (int q = 0; q < cols; ++q) {
      if (picked[q]) score(q) = -1.0;
    }
    int best = 0;
    score.maxCoeff(&best);
    picked[best] = true;
    res.support.push_back(best);

    sub.conservativeResize(Eigen::NoChange, k + 1);
    sub.col(k) = phi.col(best);
    const Eigen::VectorXcd coef = sub.colPivHouseholderQr().solve(y);
    residual = y - sub * coef;
    res.residual_norms.push_back(residual.norm());

    if (residual.norm() <= cfg.residual_tol * y_norm) {
      for (int i = 0; i <= k; ++i) res.coefficients(res.support[i]) = coef(i);
      return res;
    }
    if (k + 1 == budget) {
      for (int i = 0; i <= k; ++i) res.coefficients(res.support[i]) = coef(i);
    }
  }
  return res;
}

Estimates omp_estimate(const Observation& obs, const PilotSet& pilots,
                       const ProblemSetup& setup, const OmpConfig& radar_cfg,
                       const OmpConfig& comm_cfg) {
  SensingParams params;
  params.grid = uniform_grid(setup.grid);
  params.user_pos = setup.grid.area.clamp(setup.prior.user_mean);
  params.time_offset = 0.0;
  const int qn = static_cast<int>(params.grid.size());

  const Eigen::MatrixXcd phi_r = radar_measurement_matrix(params, pilots, setup.bs);
  const Eigen::MatrixXcd phi_c = comm_measurement_matrix(params, pilots, setup.bs);
  const OmpResult rr = omp(obs.y_r, phi_r, radar_cfg);
  const OmpResult rc = omp(obs.y_c, phi_c, comm_cfg);

  Estimates est;
  est.params = params;
  est.user_pos = params.user_pos;
  est.time_offset = 0.0;
  est.x_mmse_r = rr.coefficients;
  est.x_mmse_c = rc.coefficients;
  est.support.resize(qn + 1);
  est.support_prob_r = Eigen::VectorXd::Zero(qn + 1);
  est.support_prob_c = Eigen::VectorXd::Zero(qn + 1);
  for (int q : rr.support) {
    est.support.s_r[q] = 1;
    est.support.s[q] = 1;
    est.support_prob_r(q) = 1.0;
    if (q > 0) {
      est.targets.push_back({params.grid[q - 1], rr.coefficients(q), 1.0, q});
    }
  }
  for (int q : rc.support) {
    est.support.s_c[q] = 1;
    est.support.s[q] = 1;
    est.support_prob_c(q) = 1.0;
    if (q > 0) {
      est.scatterers.push_back({params.grid[q - 1], rc.coefficients(q), 1.0, q});
    }
  }
  auto [hr, hc] = reconstruct_channels(rr.coefficients, rc.coefficients, params,
                                       pilots, setup.bs);
  est.channel_r = std::move(hr);
  est.channel_c = std::move(hc);
  est.em_iters = 0;
  return est;
}

Estimates fixed_grid_estimate(const Observation& obs, const PilotSet& pilots,
                              const ProblemSetup& setup,
                              const PriorHyperParams& hyper, SolverConfig cfg) {
  cfg.mode = SolverMode::kFixedGrid;
  return solve(obs, pilots, setup, hyper, cfg);
}

Estimates separate_estimate(const Observation& obs, const PilotSet& pilots,
                            const ProblemSetup& setup,
                            const PriorHyperParams& hyper, SolverConfig cfg) {
  cfg.mode = SolverMode::kSeparate;
  return solve(obs, pilots, setup, hyper, cfg);
}

}  // namespace isacsim
