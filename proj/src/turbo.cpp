#include "isacsim/turbo.hpp"

#include <cmath>
#include <limits>

namespace isacsim {

namespace {

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(p) - std::log1p(-p);
}

/// Precision-domain extrinsic: subtract the prior message from the posterior,
/// clamping variances into [var_min, var_max].
GaussianMessage extrinsic_message(const Eigen::VectorXcd& post_mean,
                                  const Eigen::VectorXd& post_var,
                                  const GaussianMessage& prior,
                                  const TurboControl& ctrl) {
  const auto n = post_mean.size();
  GaussianMessage ext;
  ext.mean.resize(n);
  ext.var.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vp = std::max(post_var(i), ctrl.var_min);
    const double prec = 1.0 / vp - 1.0 / prior.var(i);
    if (prec > 1.0 / ctrl.var_max) {
      const double v = std::clamp(1.0 / prec, ctrl.var_min, ctrl.var_max);
      ext.var(i) = v;
      ext.mean(i) = v * (post_mean(i) / vp - prior.mean(i) / prior.var(i));
    } else {
      // no extractable information beyond the prior; keep the mean bounded
      ext.var(i) = ctrl.var_max;
      ext.mean(i) = post_mean(i);
    }
  }
  return ext;
}

void damp(GaussianMessage& msg, const GaussianMessage& prev, double beta) {
  msg.mean = beta * msg.mean + (1.0 - beta) * prev.mean;
  msg.var = beta * msg.var + (1.0 - beta) * prev.var;
}

}  // namespace

LmmseResult lmmse_from_gram(const Eigen::MatrixXcd& gram,
                            const Eigen::VectorXcd& phi_h_y, double noise_var,
                            const GaussianMessage& prior, const TurboControl& ctrl,
                            bool need_full_cov) {
  const auto n = gram.rows();
  LmmseResult res;
  Eigen::VectorXd prior_prec = prior.var.cwiseMax(ctrl.var_min).cwiseInverse();
  Eigen::MatrixXcd p = gram / noise_var;
  p.diagonal() += prior_prec.cast<std::complex<double>>();

  Eigen::LLT<Eigen::MatrixXcd> llt(p);
  if (llt.info() != Eigen::Success) {
    // jitter keeps the solve alive on numerically defective systems
    const double jitter = 1e-10 * std::max(1.0, std::abs(p.trace()) / n);
    p.diagonal().array() += jitter;
    llt.compute(p);
    res.regularized = true;
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("LMMSE normal matrix is not positive definite");
    }
  }

  const Eigen::VectorXcd rhs =
      prior_prec.cast<std::complex<double>>().cwiseProduct(prior.mean) +
      phi_h_y / noise_var;
  res.post_mean = llt.solve(rhs);

  // diag of the inverse from the inverse Cholesky factor
  Eigen::MatrixXcd linv = Eigen::MatrixXcd::Identity(n, n);
  llt.matrixL().solveInPlace(linv);
  res.post_var = linv.cwiseAbs2().colwise().sum();
  if (need_full_cov) res.post_cov = linv.adjoint() * linv;

  res.extrinsic = extrinsic_message(res.post_mean, res.post_var, prior, ctrl);
  return res;
}

LmmseResult lmmse_module_a(const Eigen::MatrixXcd& phi, const Eigen::VectorXcd& y,
                           double noise_var, const GaussianMessage& prior,
                           const TurboControl& ctrl, bool need_full_cov) {
  return lmmse_from_gram(phi.adjoint() * phi, phi.adjoint() * y, noise_var,
                         prior, ctrl, need_full_cov);
}

SpikeSlabPosterior spike_slab_branch_update(std::complex<double> x_pri,
                                            double v_pri, double slab_var,
                                            double prior_active_prob) {
  SpikeSlabPosterior out;
  const double v = v_pri;
  const double s2 = slab_var;
  const double mag2 = std::norm(x_pri);
  out.log_likelihood_ratio =
      std::log(v / (s2 + v)) + mag2 * s2 / (v * (s2 + v));

  const std::complex<double> mu = x_pri * (s2 / (s2 + v));
  const double nu = s2 * v / (s2 + v);

  double p;
  if (prior_active_prob <= 0.0) {
    p = 0.0;
  } else if (prior_active_prob >= 1.0) {
    p = 1.0;
  } else {
    p = sigmoid(logit(prior_active_prob) + out.log_likelihood_ratio);
  }
  out.active_prob = p;
  out.mean = p * mu;
  out.var = p * nu + p * (1.0 - p) * std::norm(mu);
  return out;
}

ModuleBResult module_b(const GaussianMessage& prior_r,
                       const GaussianMessage& prior_c,
                       const PriorHyperParams& hyper, SupportModel model,
                       const TurboControl& ctrl) {
  const auto n = prior_r.mean.size();
  ModuleBResult out;
  auto init_branch = [n](BranchPosterior& b) {
    b.mean.resize(n);
    b.var.resize(n);
    b.support_prob.resize(n);
  };
  init_branch(out.radar);
  init_branch(out.comm);
  out.support_prob_joint.resize(n);

  const double logit_lambda = logit(hyper.lambda);

  for (Eigen::Index q = 0; q < n; ++q) {
    const double vr = std::clamp(prior_r.var(q), ctrl.var_min, ctrl.var_max);
    const double vc = std::clamp(prior_c.var(q), ctrl.var_min, ctrl.var_max);

    double pi_r, pi_c;
    if (model == SupportModel::kJoint) {
      // upward branch likelihood ratios through eta_q^t to s_q
      auto log_l = [](std::complex<double> x, double v, double s2) {
        return std::log(v / (s2 + v)) + std::norm(x) * s2 / (v * (s2 + v));
      };
      const double llr_r = log_l(prior_r.mean(q), vr, hyper.slab_var_r(q));
      const double llr_c = log_l(prior_c.mean(q), vc, hyper.slab_var_c(q));
      const double log_m_r =
          logaddexp(std::log1p(-hyper.rho_r), std::log(hyper.rho_r) + llr_r);
      const double log_m_c =
          logaddexp(std::log1p(-hyper.rho_c), std::log(hyper.rho_c) + llr_c);
      out.support_prob_joint(q) = sigmoid(logit_lambda + log_m_r + log_m_c);
      // downward extrinsic activity for each branch uses the other branch only
      pi_r = hyper.rho_r * sigmoid(logit_lambda + log_m_c);
      pi_c = hyper.rho_c * sigmoid(logit_lambda + log_m_r);
    } else {
      pi_r = hyper.lambda * hyper.rho_r;
      pi_c = hyper.lambda * hyper.rho_c;
    }

    const auto post_r =
        spike_slab_branch_update(prior_r.mean(q), vr, hyper.slab_var_r(q), pi_r);
    const auto post_c =
        spike_slab_branch_update(prior_c.mean(q), vc, hyper.slab_var_c(q), pi_c);
    out.radar.mean(q) = post_r.mean;
    out.radar.var(q) = post_r.var;
    out.radar.support_prob(q) = post_r.active_prob;
    out.comm.mean(q) = post_c.mean;
    out.comm.var(q) = post_c.var;
    out.comm.support_prob(q) = post_c.active_prob;
    if (model == SupportModel::kSeparate) {
      out.support_prob_joint(q) =
          1.0 - (1.0 - post_r.active_prob) * (1.0 - post_c.active_prob);
    }
  }

  out.radar.extrinsic =
      extrinsic_message(out.radar.mean, out.radar.var, prior_r, ctrl);
  out.comm.extrinsic =
      extrinsic_message(out.comm.mean, out.comm.var, prior_c, ctrl);
  return out;
}

PosteriorState turbo_estep(
    const BranchInput& radar, const BranchInput& comm,
    const PriorHyperParams& hyper, SupportModel model, const TurboControl& ctrl,
    const std::optional<std::pair<GaussianMessage, GaussianMessage>>& init) {
  const int n = radar.model.cols();
  PosteriorState state;

  const Eigen::MatrixXcd gram_r = radar.model.gram();
  const Eigen::MatrixXcd gram_c = comm.model.gram();
  const Eigen::VectorXcd bhy_r = radar.model.adjoint_apply(radar.y);
  const Eigen::VectorXcd bhy_c = comm.model.adjoint_apply(comm.y);

  GaussianMessage pri_r, pri_c;  // Module-A priors (extrinsic from B)
  if (init) {
    pri_r = init->first;
    pri_c = init->second;
  } else {
    pri_r.mean = Eigen::VectorXcd::Zero(n);
    pri_c.mean = Eigen::VectorXcd::Zero(n);
    pri_r.var = (hyper.lambda * hyper.rho_r * hyper.slab_var_r.array())
                    .max(ctrl.var_min)
                    .matrix();
    pri_c.var = (hyper.lambda * hyper.rho_c * hyper.slab_var_c.array())
                    .max(ctrl.var_min)
                    .matrix();
  }

  GaussianMessage ext_a_r, ext_a_c, ext_b_r, ext_b_c;
  Eigen::VectorXcd prev_post = Eigen::VectorXcd::Zero(2 * n);
  bool have_prev_a = false, have_prev_b = false;

  for (int iter = 0; iter < ctrl.max_iters; ++iter) {
    state.iterations = iter + 1;
    auto res_r = lmmse_from_gram(gram_r, bhy_r, radar.noise_var, pri_r, ctrl);
    auto res_c = lmmse_from_gram(gram_c, bhy_c, comm.noise_var, pri_c, ctrl);
    state.regularized |= res_r.regularized || res_c.regularized;

    GaussianMessage a_r = res_r.extrinsic;
    GaussianMessage a_c = res_c.extrinsic;
    if (have_prev_a) {
      damp(a_r, ext_a_r, ctrl.damping);
      damp(a_c, ext_a_c, ctrl.damping);
    }
    ext_a_r = a_r;
    ext_a_c = a_c;
    have_prev_a = true;

    auto bres = module_b(ext_a_r, ext_a_c, hyper, model, ctrl);

    GaussianMessage b_r = bres.radar.extrinsic;
    GaussianMessage b_c = bres.comm.extrinsic;
    if (have_prev_b) {
      damp(b_r, ext_b_r, ctrl.damping);
      damp(b_c, ext_b_c, ctrl.damping);
    }
    ext_b_r = b_r;
    ext_b_c = b_c;
    have_prev_b = true;
    pri_r = ext_b_r;
    pri_c = ext_b_c;

    state.x_mean_r = bres.radar.mean;
    state.x_mean_c = bres.comm.mean;
    state.x_var_r = bres.radar.var;
    state.x_var_c = bres.comm.var;
    state.support_prob_r = bres.radar.support_prob;
    state.support_prob_c = bres.comm.support_prob;
    state.support_prob_joint = bres.support_prob_joint;

    Eigen::VectorXcd post(2 * n);
    post << state.x_mean_r, state.x_mean_c;
    const double delta = (post - prev_post).cwiseAbs().maxCoeff();
    prev_post = post;
    if (delta < ctrl.tol) {
      state.converged = true;
      break;
    }
  }

  // dense Gaussian posterior at the final priors, kept for the M-step
  auto fin_r =
      lmmse_from_gram(gram_r, bhy_r, radar.noise_var, pri_r, ctrl, true);
  auto fin_c = lmmse_from_gram(gram_c, bhy_c, comm.noise_var, pri_c, ctrl, true);
  state.dense_post_mean_r = fin_r.post_mean;
  state.dense_post_mean_c = fin_c.post_mean;
  state.dense_post_cov_r = std::move(fin_r.post_cov);
  state.dense_post_cov_c = std::move(fin_c.post_cov);
  return state;
}

}  // namespace isacsim
