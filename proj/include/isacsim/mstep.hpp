#pragma once

#include <Eigen/Dense>
#include <vector>

#include "isacsim/channel.hpp"

namespace isacsim {

/// Prior over the sensing parameters: Gaussian on the user position
/// (variance sigma_p_sq/2 per coordinate), box on the time offset, uniform
/// over the area for grid points.
struct SensingPrior {
  Position user_mean;
  double sigma_p_sq = 1.0;
  double tau_bound = 0.0;
};

/// Everything the surrogate needs besides the sensing parameters themselves:
/// the observation, the dense Gaussian posterior of the coefficients from the
/// E-step, and the physical setup.
struct SurrogateContext {
  const Eigen::VectorXcd& y_r;
  const Eigen::VectorXcd& y_c;
  const Eigen::VectorXcd& post_mean_r;
  const Eigen::VectorXcd& post_mean_c;
  const Eigen::MatrixXcd& post_cov_r;
  const Eigen::MatrixXcd& post_cov_c;
  double noise_var_r;
  double noise_var_c;
  const PilotSet& pilots;
  const BaseStation& bs;
  Rect area;
  SensingPrior prior;
};

/// Expected complete-data log likelihood plus log prior, up to a constant:
///   -sum_t (1/noise_var_t) [ ||y_t - Phi_t(xi) x_t||^2 + tr(Phi_t V_t Phi_t^H) ]
///   + ln p(xi).
/// Returns -inf when xi leaves the prior support.
double surrogate_value(const SensingParams& params, const SurrogateContext& ctx);

struct SurrogateGradient {
  Eigen::MatrixX2d grad_grid;  // Q x 2, zero outside the active set
  Eigen::Vector2d grad_user;
  double grad_tau = 0.0;
};

/// Analytic gradient via the chain rule through the steering vectors and
/// delay phases. Grid gradients are evaluated only for columns listed in
/// `active_columns` (indices 1..Q); the user and time-offset gradients always
/// accumulate over every column they touch.
SurrogateGradient surrogate_gradient(const SensingParams& params,
                                     const SurrogateContext& ctx,
                                     const std::vector<int>& active_columns);

struct ArmijoParams {
  double c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 20;
  double step_pos = 1.0;   // initial step, meters
  double step_tau = 1e-8;  // initial step, seconds
};

struct AscentResult {
  SensingParams params;
  double value_before = 0.0;
  double value_after = 0.0;
  bool any_block_moved = false;
};

/// One ascent pass in the fixed block order grid -> user -> time offset, each
/// block with its own backtracking search on the normalized ascent direction.
/// Grid points and the user estimate are projected into the area, the time
/// offset into its box. The surrogate value never decreases.
AscentResult armijo_ascent(const SensingParams& params,
                           const SurrogateGradient& grads,
                           const SurrogateContext& ctx,
                           const ArmijoParams& rule);

/// Drops from the active set the lower-activity member of any pair of grid
/// points closer than `radius`; prevents duplicate-column degeneracies.
std::vector<int> filter_colliding_columns(const std::vector<int>& active_columns,
                                          const SensingParams& params,
                                          const Eigen::VectorXd& activity,
                                          double radius);

}  // namespace isacsim
