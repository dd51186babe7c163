#pragma once

// Independent reference implementations used to check the library: brute-force
// enumeration for the support posterior, direct Gaussian conditioning for the
// LMMSE step, numerical quadrature for the scalar denoiser, finite differences
// for the surrogate gradient, and the explicit Kronecker dictionary. None of
// them share code with the paths they verify.

#include <Eigen/Dense>

#include "isacsim/channel.hpp"
#include "isacsim/mstep.hpp"
#include "isacsim/prior.hpp"
#include "isacsim/turbo.hpp"

namespace isacsim::oracle {

/// Exact marginals of the two-branch spike-slab model with the joint support
/// layer, by enumerating all 2^(3n) support configurations with closed-form
/// Gaussian integrals. Feasible for n <= 3 or so.
struct EnumerationResult {
  Eigen::VectorXcd mean_r, mean_c;
  Eigen::VectorXd var_r, var_c;
  Eigen::VectorXd support_prob_r, support_prob_c, support_prob_joint;
};
EnumerationResult enumerate_posterior(const GaussianMessage& prior_r,
                                      const GaussianMessage& prior_c,
                                      const PriorHyperParams& hyper);

/// Gaussian posterior of x in y = Phi x + z via the covariance
/// (measurement-update) form: K = P Phi^H (Phi P Phi^H + noise I)^-1.
struct ConditioningResult {
  Eigen::VectorXcd mean;
  Eigen::MatrixXcd cov;
};
ConditioningResult gaussian_conditioning(const Eigen::MatrixXcd& phi,
                                         const Eigen::VectorXcd& y,
                                         double noise_var,
                                         const Eigen::VectorXcd& prior_mean,
                                         const Eigen::VectorXd& prior_var);

/// Moments of the scalar spike-slab posterior by 2-D grid quadrature of the
/// slab component plus the analytic point mass at zero.
struct QuadratureResult {
  std::complex<double> mean;
  double var;
  double active_prob;
};
QuadratureResult spike_slab_quadrature(std::complex<double> x_pri, double v_pri,
                                       double slab_var, double active_prob,
                                       int grid_points = 801);

/// Central finite differences of the surrogate through every coordinate of
/// xi: grid positions, user position and time offset.
SurrogateGradient finite_difference_gradient(const SensingParams& params,
                                             const SurrogateContext& ctx,
                                             double step_pos = 1e-4,
                                             double step_tau = 1e-12);

/// The full Kronecker radar dictionary stacked over pilots:
/// block n = (v_n^T A) kron (A D_n^r), with (Q+1)^2 columns.
Eigen::MatrixXcd kronecker_radar_dictionary(const SensingParams& params,
                                            const PilotSet& pilots,
                                            const BaseStation& bs);

}  // namespace isacsim::oracle
