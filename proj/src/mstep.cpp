#include "isacsim/mstep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isacsim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const std::complex<double> kI(0.0, 1.0);

bool params_in_support(const SensingParams& params, const SurrogateContext& ctx) {
  if (ctx.prior.tau_bound > 0 &&
      std::abs(params.time_offset) > ctx.prior.tau_bound + 1e-18) {
    return false;
  }
  if (!ctx.area.contains(params.user_pos)) return false;
  for (const auto& r : params.grid) {
    if (!ctx.area.contains(r)) return false;
    if (distance(r, ctx.bs.pos) < 1e-6) return false;  // steering singular at the BS
  }
  if (distance(params.user_pos, ctx.bs.pos) < 1e-6) return false;
  return true;
}

double log_prior(const SensingParams& params, const SurrogateContext& ctx) {
  const Position d = params.user_pos - ctx.prior.user_mean;
  return -(d.x * d.x + d.y * d.y) / ctx.prior.sigma_p_sq;
}

double branch_fit(const BranchModel& model, const Eigen::VectorXcd& y,
                  const Eigen::VectorXcd& x, const Eigen::MatrixXcd& v,
                  double noise_var) {
  const Eigen::VectorXcd r = y - model.apply(x);
  const Eigen::MatrixXcd gram = model.gram();
  const double trace_term = (gram.transpose().cwiseProduct(v)).sum().real();
  return -(r.squaredNorm() + trace_term) / noise_var;
}

}  // namespace

double surrogate_value(const SensingParams& params, const SurrogateContext& ctx) {
  if (!params_in_support(params, ctx)) return kNegInf;
  const BranchModel radar = make_radar_model(params, ctx.pilots, ctx.bs);
  const BranchModel comm = make_comm_model(params, ctx.pilots, ctx.bs);
  return branch_fit(radar, ctx.y_r, ctx.post_mean_r, ctx.post_cov_r, ctx.noise_var_r) +
         branch_fit(comm, ctx.y_c, ctx.post_mean_c, ctx.post_cov_c, ctx.noise_var_c) +
         log_prior(params, ctx);
}

namespace {

/// Per-branch scratch shared by all parameter blocks: the residual, the
/// posterior-smeared dictionary W = Phi V, and the per-(column, pilot)
/// projections a_q^H g_q^(j) with g_q = conj(x_q) r - W(:, q).
struct BranchScratch {
  BranchModel model;
  Eigen::MatrixXcd rmat;   // M x N_p residual blocks
  Eigen::MatrixXcd w;      // (M N_p) x (Q+1)
  Eigen::MatrixXcd ahg;    // (Q+1) x N_p : a_q^H g_q^(j)
  Eigen::VectorXd coltau;  // raw per-column delay-phase sensitivities
  double noise_var = 1.0;

  void build(BranchModel&& mdl, const Eigen::VectorXcd& y,
             const Eigen::VectorXcd& x, const Eigen::MatrixXcd& v,
             double nv) {
    model = std::move(mdl);
    noise_var = nv;
    const int m = static_cast<int>(model.basis.rows());
    const int np = static_cast<int>(model.couple.rows());
    const int cols = model.cols();

    const Eigen::VectorXcd resid = y - model.apply(x);
    rmat = Eigen::Map<const Eigen::MatrixXcd>(resid.data(), m, np);
    w = model.full_matrix() * v;

    const Eigen::MatrixXcd ar = model.basis.adjoint() * rmat;  // (Q+1) x N_p
    ahg.resize(cols, np);
    for (int j = 0; j < np; ++j) {
      // diag of A^H W_j: only the own-column projections are needed
      const auto wj = w.middleRows(j * m, m);
      const Eigen::RowVectorXcd diag =
          (model.basis.conjugate().cwiseProduct(wj)).colwise().sum();
      for (int q = 0; q < cols; ++q) {
        ahg(q, j) = std::conj(x(q)) * ar(q, j) - diag(q);
      }
    }

    coltau.resize(cols);
    for (int q = 0; q < cols; ++q) {
      std::complex<double> acc(0.0, 0.0);
      for (int j = 0; j < np; ++j) {
        acc += kI * model.omega(j) * std::conj(model.coef(j, q)) * ahg(q, j);
      }
      coltau(q) = acc.real();
    }
  }

};

}  // namespace

SurrogateGradient surrogate_gradient(const SensingParams& params,
                                     const SurrogateContext& ctx,
                                     const std::vector<int>& active_columns) {
  SurrogateGradient g;
  const int qn = static_cast<int>(params.grid.size());
  g.grad_grid = Eigen::MatrixX2d::Zero(qn, 2);
  g.grad_user.setZero();
  g.grad_tau = 0.0;

  BranchScratch radar, comm;
  radar.build(make_radar_model(params, ctx.pilots, ctx.bs), ctx.y_r,
              ctx.post_mean_r, ctx.post_cov_r, ctx.noise_var_r);
  comm.build(make_comm_model(params, ctx.pilots, ctx.bs), ctx.y_c,
             ctx.post_mean_c, ctx.post_cov_c, ctx.noise_var_c);

  const int m = ctx.bs.array.num_antennas;
  const int np = ctx.pilots.count();
  const ArrayGeometry geom(m);

  // theta- and tau-direction sensitivities of the data term through one
  // column: S_theta = Re sum_j [alpha_j conj(ahg) + beta_j conj(a'^H g)],
  // with alpha the couple derivative (radar only) and beta = coef.
  struct Sens {
    double s_theta;
    double s_tau;
  };
  auto column_sens = [&](const BranchScratch& br, int q, bool radar_branch) {
    const Eigen::VectorXcd aprime = steering_derivative(br.model.theta(q), geom);
    Eigen::VectorXcd vprime;
    if (radar_branch) vprime = ctx.pilots.downlink.transpose() * aprime;  // a'^T v_j
    std::complex<double> acc(0.0, 0.0);
    const std::complex<double> xq =
        radar_branch ? ctx.post_mean_r(q) : ctx.post_mean_c(q);
    for (int j = 0; j < np; ++j) {
      const auto wj = br.w.middleRows(j * m, m).col(q);
      const std::complex<double> ap_g =
          std::conj(xq) * (aprime.adjoint() * br.rmat.col(j))(0) -
          (aprime.adjoint() * wj)(0);
      std::complex<double> alpha = br.model.coef(j, q);  // beta_j, reused
      acc += alpha * std::conj(ap_g);
      if (radar_branch) {
        const std::complex<double> couple_deriv =
            vprime(j) * br.model.phase(j, q);
        acc += couple_deriv * std::conj(br.ahg(q, j));
      }
    }
    return Sens{acc.real(), br.coltau(q)};
  };

  // grid columns: touch column q of both branches
  for (int q : active_columns) {
    if (q < 1 || q > qn) continue;
    const Position& r = params.grid[q - 1];
    const Position dtheta = aoa_gradient(ctx.bs.pos, r);
    const Position dtau_r = radar_delay_gradient(ctx.bs.pos, r);
    const auto dtau_c = comm_relative_delay_gradient(ctx.bs.pos, r, params.user_pos);

    const Sens sr = column_sens(radar, q, true);
    const Sens sc = column_sens(comm, q, false);
    const double fr = 2.0 / radar.noise_var;
    const double fc = 2.0 / comm.noise_var;
    g.grad_grid(q - 1, 0) = fr * (sr.s_theta * dtheta.x + sr.s_tau * dtau_r.x) +
                            fc * (sc.s_theta * dtheta.x + sc.s_tau * dtau_c.d_scatterer.x);
    g.grad_grid(q - 1, 1) = fr * (sr.s_theta * dtheta.y + sr.s_tau * dtau_r.y) +
                            fc * (sc.s_theta * dtheta.y + sc.s_tau * dtau_c.d_scatterer.y);
  }

  // user position: radar column 0 (angle + delay), comm column 0 (angle only),
  // and the delay phases of every comm grid column
  {
    const Position dtheta_u = aoa_gradient(ctx.bs.pos, params.user_pos);
    const Position dtau_u = radar_delay_gradient(ctx.bs.pos, params.user_pos);
    const Sens sr0 = column_sens(radar, 0, true);
    const Sens sc0 = column_sens(comm, 0, false);
    const double fr = 2.0 / radar.noise_var;
    const double fc = 2.0 / comm.noise_var;
    g.grad_user(0) = fr * (sr0.s_theta * dtheta_u.x + sr0.s_tau * dtau_u.x) +
                     fc * sc0.s_theta * dtheta_u.x;
    g.grad_user(1) = fr * (sr0.s_theta * dtheta_u.y + sr0.s_tau * dtau_u.y) +
                     fc * sc0.s_theta * dtheta_u.y;
    for (int q = 1; q <= qn; ++q) {
      const auto dtau =
          comm_relative_delay_gradient(ctx.bs.pos, params.grid[q - 1], params.user_pos);
      g.grad_user(0) += fc * comm.coltau(q) * dtau.d_user.x;
      g.grad_user(1) += fc * comm.coltau(q) * dtau.d_user.y;
    }
    // Gaussian prior on the user position
    const Position d = params.user_pos - ctx.prior.user_mean;
    g.grad_user(0) += -2.0 * d.x / ctx.prior.sigma_p_sq;
    g.grad_user(1) += -2.0 * d.y / ctx.prior.sigma_p_sq;
  }

  // time offset: every comm delay phase shifts by one
  g.grad_tau = (2.0 / comm.noise_var) * comm.coltau.sum();

  return g;
}

namespace {

SensingParams project_params(SensingParams p, const SurrogateContext& ctx) {
  for (auto& r : p.grid) r = ctx.area.clamp(r);
  p.user_pos = ctx.area.clamp(p.user_pos);
  if (ctx.prior.tau_bound > 0) {
    p.time_offset =
        std::clamp(p.time_offset, -ctx.prior.tau_bound, ctx.prior.tau_bound);
  }
  return p;
}

/// Backtracking on one block. `apply_step` maps a step length to a candidate;
/// `slope` is the directional derivative at step 0.
template <typename ApplyStep>
bool backtrack_block(SensingParams& params, double& value, double slope,
                     double init_step, const ArmijoParams& rule,
                     const SurrogateContext& ctx, ApplyStep&& apply_step) {
  if (!(slope > 0.0)) return false;
  double step = init_step;
  for (int k = 0; k <= rule.max_backtracks; ++k) {
    SensingParams cand = project_params(apply_step(params, step), ctx);
    const double cand_value = surrogate_value(cand, ctx);
    if (cand_value >= value + rule.c1 * step * slope) {
      params = std::move(cand);
      value = cand_value;
      return true;
    }
    step *= rule.shrink;
  }
  return false;
}

/// Data-fit state of one branch under single-column swaps. Maintaining the
/// residual, the trace term and W = Phi V makes a candidate move of grid
/// point q an O(M N_p) update instead of a full surrogate evaluation.
struct ColumnSwapState {
  Eigen::MatrixXcd phi;
  Eigen::VectorXcd resid;
  Eigen::MatrixXcd w;  // Phi V
  double trace = 0.0;
  const Eigen::VectorXcd* x = nullptr;
  const Eigen::MatrixXcd* v = nullptr;
  double noise_var = 1.0;

  void init(const BranchModel& model, const Eigen::VectorXcd& y,
            const Eigen::VectorXcd& post_mean, const Eigen::MatrixXcd& post_cov,
            double nv) {
    phi = model.full_matrix();
    x = &post_mean;
    v = &post_cov;
    noise_var = nv;
    resid = y - phi * post_mean;
    w = phi * post_cov;
    trace = (model.gram().transpose().cwiseProduct(post_cov)).sum().real();
  }

  double fit() const { return -(resid.squaredNorm() + trace) / noise_var; }

  struct SwapDelta {
    Eigen::VectorXcd new_col;
    Eigen::VectorXcd resid_delta;  // (new - old) * x_q
    double trace_delta = 0.0;
    double fit_new = 0.0;
  };

  SwapDelta try_swap(int q, const Eigen::VectorXcd& new_col) const {
    SwapDelta d;
    d.new_col = new_col;
    const Eigen::VectorXcd delta = new_col - phi.col(q);
    d.resid_delta = delta * (*x)(q);
    const double resid_sq = (resid - d.resid_delta).squaredNorm();
    d.trace_delta = 2.0 * delta.dot(w.col(q)).real() +
                    (*v)(q, q).real() * delta.squaredNorm();
    d.fit_new = -(resid_sq + trace + d.trace_delta) / noise_var;
    return d;
  }

  void accept(int q, const SwapDelta& d) {
    const Eigen::VectorXcd delta = d.new_col - phi.col(q);
    resid -= d.resid_delta;
    trace += d.trace_delta;
    w.noalias() += delta * v->row(q);
    phi.col(q) = d.new_col;
  }
};

/// Sequential per-point line searches over the active grid points, most
/// energetic gradient first. Joint steps over all grid points stall once the
/// support saturates (one rippling column vetoes the whole block), so each
/// point backtracks on its own.
double refine_grid_points(SensingParams& params, const SurrogateGradient& grads,
                          const SurrogateContext& ctx, const ArmijoParams& rule,
                          bool* moved) {
  const int qn = static_cast<int>(params.grid.size());
  std::vector<int> order;
  for (int q = 1; q <= qn; ++q) {
    if (grads.grad_grid.row(q - 1).norm() > 0.0) order.push_back(q);
  }
  if (order.empty()) return surrogate_value(params, ctx);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return grads.grad_grid.row(a - 1).norm() > grads.grad_grid.row(b - 1).norm();
  });

  const BranchModel radar0 = make_radar_model(params, ctx.pilots, ctx.bs);
  const BranchModel comm0 = make_comm_model(params, ctx.pilots, ctx.bs);
  ColumnSwapState radar, comm;
  radar.init(radar0, ctx.y_r, ctx.post_mean_r, ctx.post_cov_r, ctx.noise_var_r);
  comm.init(comm0, ctx.y_c, ctx.post_mean_c, ctx.post_cov_c, ctx.noise_var_c);

  double fit = radar.fit() + comm.fit();  // value minus the xi prior terms

  for (int q : order) {
    const Eigen::Vector2d g = grads.grad_grid.row(q - 1).transpose();
    const double slope = g.norm();
    const Eigen::Vector2d dir = g / slope;
    double step = rule.step_pos;
    for (int k = 0; k <= rule.max_backtracks; ++k, step *= rule.shrink) {
      Position cand{params.grid[q - 1].x + step * dir(0),
                    params.grid[q - 1].y + step * dir(1)};
      cand = ctx.area.clamp(cand);
      if (distance(cand, ctx.bs.pos) < 1e-6) continue;
      const auto dr = radar.try_swap(q, radar_column_for(cand, ctx.pilots, ctx.bs));
      const auto dc = comm.try_swap(
          q, comm_column_for(cand, params.user_pos, params.time_offset,
                             ctx.pilots, ctx.bs));
      const double fit_new = dr.fit_new + dc.fit_new;
      if (fit_new >= fit + rule.c1 * step * slope) {
        radar.accept(q, dr);
        comm.accept(q, dc);
        params.grid[q - 1] = cand;
        fit = fit_new;
        if (moved) *moved = true;
        break;
      }
    }
  }
  return surrogate_value(params, ctx);
}

}  // namespace

AscentResult armijo_ascent(const SensingParams& params,
                           const SurrogateGradient& grads,
                           const SurrogateContext& ctx,
                           const ArmijoParams& rule) {
  AscentResult out;
  out.params = params;
  out.value_before = surrogate_value(params, ctx);
  double value = out.value_before;

  // grid block: every active point runs its own backtracking search
  value = refine_grid_points(out.params, grads, ctx, rule, &out.any_block_moved);

  // user block
  const double gu_norm = grads.grad_user.norm();
  if (gu_norm > 0.0) {
    const Eigen::Vector2d dir = grads.grad_user / gu_norm;
    out.any_block_moved |= backtrack_block(
        out.params, value, gu_norm, rule.step_pos, rule, ctx,
        [&](const SensingParams& p, double step) {
          SensingParams cand = p;
          cand.user_pos.x += step * dir(0);
          cand.user_pos.y += step * dir(1);
          return cand;
        });
  }

  // time-offset block
  if (grads.grad_tau != 0.0 && ctx.prior.tau_bound > 0.0) {
    const double dir = grads.grad_tau > 0 ? 1.0 : -1.0;
    out.any_block_moved |= backtrack_block(
        out.params, value, std::abs(grads.grad_tau), rule.step_tau, rule, ctx,
        [&](const SensingParams& p, double step) {
          SensingParams cand = p;
          cand.time_offset += step * dir;
          return cand;
        });
  }

  out.value_after = value;
  return out;
}

std::vector<int> filter_colliding_columns(const std::vector<int>& active_columns,
                                          const SensingParams& params,
                                          const Eigen::VectorXd& activity,
                                          double radius) {
  std::vector<int> keep;
  for (int q : active_columns) {
    bool frozen = false;
    for (int other : active_columns) {
      if (other == q) continue;
      if (distance(params.grid[q - 1], params.grid[other - 1]) < radius) {
        const bool lower = activity(q) < activity(other) ||
                           (activity(q) == activity(other) && q > other);
        if (lower) {
          frozen = true;
          break;
        }
      }
    }
    if (!frozen) keep.push_back(q);
  }
  return keep;
}

}  // namespace isacsim
