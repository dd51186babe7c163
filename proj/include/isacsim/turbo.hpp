#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "isacsim/channel.hpp"
#include "isacsim/prior.hpp"

namespace isacsim {

/// Diagonal complex Gaussian message exchanged between the two estimators.
struct GaussianMessage {
  Eigen::VectorXcd mean;
  Eigen::VectorXd var;
};

struct TurboControl {
  int max_iters = 20;
  double tol = 1e-6;
  double damping = 0.5;  // 1.0 disables damping
  double var_min = 1e-12;
  double var_max = 1e12;
};

/// Whether Module B couples the two branches through the joint support layer
/// or treats them as independent Bernoulli-Gaussian priors with matched
/// marginal activity lambda * rho_t.
enum class SupportModel { kJoint, kSeparate };

struct LmmseResult {
  Eigen::VectorXcd post_mean;
  Eigen::VectorXd post_var;   // diagonal of the posterior covariance
  Eigen::MatrixXcd post_cov;  // filled only when requested
  GaussianMessage extrinsic;
  bool regularized = false;
};

/// LMMSE update of the linear model y = Phi x + z under the Gaussian prior
/// message; extrinsic obtained by precision subtraction on the diagonal.
LmmseResult lmmse_module_a(const Eigen::MatrixXcd& phi, const Eigen::VectorXcd& y,
                           double noise_var, const GaussianMessage& prior,
                           const TurboControl& ctrl, bool need_full_cov = true);

/// Same update starting from the precomputed normal equations
/// (gram = Phi^H Phi, phi_h_y = Phi^H y).
LmmseResult lmmse_from_gram(const Eigen::MatrixXcd& gram,
                            const Eigen::VectorXcd& phi_h_y, double noise_var,
                            const GaussianMessage& prior, const TurboControl& ctrl,
                            bool need_full_cov = false);

/// Scalar spike-and-slab posterior for an AWGN pseudo-observation x_pri of a
/// coefficient that is zero with probability 1 - prior_active_prob and
/// CN(0, slab_var) otherwise.
struct SpikeSlabPosterior {
  std::complex<double> mean{0.0, 0.0};
  double var = 0.0;
  double active_prob = 0.0;
  double log_likelihood_ratio = 0.0;  // log CN(x;0,slab+v) - log CN(x;0,v)
};
SpikeSlabPosterior spike_slab_branch_update(std::complex<double> x_pri,
                                            double v_pri, double slab_var,
                                            double prior_active_prob);

/// Per-branch posterior summary produced by Module B.
struct BranchPosterior {
  Eigen::VectorXcd mean;
  Eigen::VectorXd var;
  Eigen::VectorXd support_prob;
  GaussianMessage extrinsic;
};

struct ModuleBResult {
  BranchPosterior radar;
  BranchPosterior comm;
  Eigen::VectorXd support_prob_joint;
};

/// Exact sum-product sweep over the tree factor graph coupling the two
/// branch supports through the joint support vector.
ModuleBResult module_b(const GaussianMessage& prior_r,
                       const GaussianMessage& prior_c,
                       const PriorHyperParams& hyper, SupportModel model,
                       const TurboControl& ctrl);

/// Full E-step output. x-posteriors come from Module B; the dense Gaussian
/// posterior from the final Module A pass is retained for the M-step.
struct PosteriorState {
  Eigen::VectorXcd x_mean_r, x_mean_c;
  Eigen::VectorXd x_var_r, x_var_c;
  Eigen::VectorXd support_prob_r, support_prob_c, support_prob_joint;
  Eigen::VectorXcd dense_post_mean_r, dense_post_mean_c;
  Eigen::MatrixXcd dense_post_cov_r, dense_post_cov_c;
  bool converged = false;
  bool regularized = false;
  int iterations = 0;
};

struct BranchInput {
  const Eigen::VectorXcd& y;
  const BranchModel& model;
  double noise_var;
};

/// Alternates Module A and Module B with damped extrinsic exchange until the
/// Module-B posterior mean stabilizes. Never throws on non-convergence; the
/// best iterate is returned with converged = false.
PosteriorState turbo_estep(
    const BranchInput& radar, const BranchInput& comm,
    const PriorHyperParams& hyper, SupportModel model, const TurboControl& ctrl,
    const std::optional<std::pair<GaussianMessage, GaussianMessage>>& init =
        std::nullopt);

}  // namespace isacsim
