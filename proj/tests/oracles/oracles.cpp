#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace isacsim::oracle {

namespace {

double cn_density(std::complex<double> x, double var) {
  return std::exp(-std::norm(x) / var) / (std::numbers::pi * var);
}

}  // namespace

EnumerationResult enumerate_posterior(const GaussianMessage& prior_r,
                                      const GaussianMessage& prior_c,
                                      const PriorHyperParams& hyper) {
  const int n = static_cast<int>(prior_r.mean.size());
  if (n > 6) throw std::invalid_argument("enumeration oracle limited to small n");

  EnumerationResult out;
  out.mean_r = Eigen::VectorXcd::Zero(n);
  out.mean_c = Eigen::VectorXcd::Zero(n);
  out.var_r = Eigen::VectorXd::Zero(n);
  out.var_c = Eigen::VectorXd::Zero(n);
  out.support_prob_r = Eigen::VectorXd::Zero(n);
  out.support_prob_c = Eigen::VectorXd::Zero(n);
  out.support_prob_joint = Eigen::VectorXd::Zero(n);

  // conditional slab posteriors given the AWGN pseudo-observation
  auto slab_mean = [](std::complex<double> x, double v, double s2) {
    return x * (s2 / (s2 + v));
  };
  auto slab_second_moment = [&](std::complex<double> x, double v, double s2) {
    return s2 * v / (s2 + v) + std::norm(slab_mean(x, v, s2));
  };

  double total = 0.0;
  Eigen::VectorXcd sum_mean_r = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd sum_mean_c = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXd sum_m2_r = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sum_m2_c = Eigen::VectorXd::Zero(n);

  const int configs = 1 << (3 * n);
  for (int mask = 0; mask < configs; ++mask) {
    double w = 1.0;
    for (int q = 0; q < n; ++q) {
      const int s = (mask >> (3 * q)) & 1;
      const int sr = (mask >> (3 * q + 1)) & 1;
      const int sc = (mask >> (3 * q + 2)) & 1;
      // support prior p(s) p(s^r|s) p(s^c|s)
      w *= s ? hyper.lambda : 1.0 - hyper.lambda;
      if (s == 0) {
        if (sr || sc) {
          w = 0.0;
          break;
        }
      } else {
        w *= sr ? hyper.rho_r : 1.0 - hyper.rho_r;
        w *= sc ? hyper.rho_c : 1.0 - hyper.rho_c;
      }
      // evidence of the pseudo-observations
      const double ev_r = cn_density(
          prior_r.mean(q), prior_r.var(q) + (sr ? hyper.slab_var_r(q) : 0.0));
      const double ev_c = cn_density(
          prior_c.mean(q), prior_c.var(q) + (sc ? hyper.slab_var_c(q) : 0.0));
      w *= ev_r * ev_c;
    }
    if (w == 0.0) continue;
    total += w;
    for (int q = 0; q < n; ++q) {
      const int s = (mask >> (3 * q)) & 1;
      const int sr = (mask >> (3 * q + 1)) & 1;
      const int sc = (mask >> (3 * q + 2)) & 1;
      if (s) out.support_prob_joint(q) += w;
      if (sr) {
        out.support_prob_r(q) += w;
        sum_mean_r(q) +=
            w * slab_mean(prior_r.mean(q), prior_r.var(q), hyper.slab_var_r(q));
        sum_m2_r(q) += w * slab_second_moment(prior_r.mean(q), prior_r.var(q),
                                              hyper.slab_var_r(q));
      }
      if (sc) {
        out.support_prob_c(q) += w;
        sum_mean_c(q) +=
            w * slab_mean(prior_c.mean(q), prior_c.var(q), hyper.slab_var_c(q));
        sum_m2_c(q) += w * slab_second_moment(prior_c.mean(q), prior_c.var(q),
                                              hyper.slab_var_c(q));
      }
    }
  }

  for (int q = 0; q < n; ++q) {
    out.support_prob_r(q) /= total;
    out.support_prob_c(q) /= total;
    out.support_prob_joint(q) /= total;
    out.mean_r(q) = sum_mean_r(q) / total;
    out.mean_c(q) = sum_mean_c(q) / total;
    out.var_r(q) = sum_m2_r(q) / total - std::norm(out.mean_r(q));
    out.var_c(q) = sum_m2_c(q) / total - std::norm(out.mean_c(q));
  }
  return out;
}

ConditioningResult gaussian_conditioning(const Eigen::MatrixXcd& phi,
                                         const Eigen::VectorXcd& y,
                                         double noise_var,
                                         const Eigen::VectorXcd& prior_mean,
                                         const Eigen::VectorXd& prior_var) {
  const auto rows = phi.rows();
  const Eigen::MatrixXcd p = prior_var.cast<std::complex<double>>().asDiagonal();
  const Eigen::MatrixXcd s =
      phi * p * phi.adjoint() +
      noise_var * Eigen::MatrixXcd::Identity(rows, rows);
  const Eigen::MatrixXcd k = p * phi.adjoint() * s.inverse();
  ConditioningResult res;
  res.mean = prior_mean + k * (y - phi * prior_mean);
  res.cov = p - k * phi * p;
  return res;
}

QuadratureResult spike_slab_quadrature(std::complex<double> x_pri, double v_pri,
                                       double slab_var, double active_prob,
                                       int grid_points) {
  // posterior ~ (1-pi) delta(x) CN(x_pri; x, v) + pi CN(x;0,s2) CN(x_pri; x, v)
  const double spike_weight = (1.0 - active_prob) * cn_density(x_pri, v_pri);

  const double extent = 6.0 * std::sqrt(std::max(slab_var, v_pri)) +
                        std::abs(x_pri);
  const double h = 2.0 * extent / (grid_points - 1);
  double slab_mass = 0.0;
  std::complex<double> slab_mean(0.0, 0.0);
  double slab_m2 = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double re = -extent + i * h;
    for (int j = 0; j < grid_points; ++j) {
      const double im = -extent + j * h;
      const std::complex<double> x(re, im);
      const double f = cn_density(x, slab_var) * cn_density(x_pri - x, v_pri);
      slab_mass += f;
      slab_mean += f * x;
      slab_m2 += f * std::norm(x);
    }
  }
  const double cell = h * h;
  slab_mass *= cell * active_prob;
  slab_mean *= cell * active_prob;
  slab_m2 *= cell * active_prob;

  const double z = spike_weight + slab_mass;
  QuadratureResult out;
  out.active_prob = slab_mass / z;
  out.mean = slab_mean / z;
  out.var = slab_m2 / z - std::norm(out.mean);
  return out;
}

SurrogateGradient finite_difference_gradient(const SensingParams& params,
                                             const SurrogateContext& ctx,
                                             double step_pos, double step_tau) {
  SurrogateGradient g;
  const int qn = static_cast<int>(params.grid.size());
  g.grad_grid = Eigen::MatrixX2d::Zero(qn, 2);

  auto central = [&](auto&& mutate, double step) {
    SensingParams hi = params, lo = params;
    mutate(hi, step);
    mutate(lo, -step);
    return (surrogate_value(hi, ctx) - surrogate_value(lo, ctx)) / (2 * step);
  };

  for (int q = 0; q < qn; ++q) {
    g.grad_grid(q, 0) = central(
        [q](SensingParams& p, double d) { p.grid[q].x += d; }, step_pos);
    g.grad_grid(q, 1) = central(
        [q](SensingParams& p, double d) { p.grid[q].y += d; }, step_pos);
  }
  g.grad_user(0) =
      central([](SensingParams& p, double d) { p.user_pos.x += d; }, step_pos);
  g.grad_user(1) =
      central([](SensingParams& p, double d) { p.user_pos.y += d; }, step_pos);
  g.grad_tau = central(
      [](SensingParams& p, double d) { p.time_offset += d; }, step_tau);
  return g;
}

Eigen::MatrixXcd kronecker_radar_dictionary(const SensingParams& params,
                                            const PilotSet& pilots,
                                            const BaseStation& bs) {
  const int m = bs.array.num_antennas;
  const int np = pilots.count();
  const int cols = params.num_columns();
  const Eigen::MatrixXcd a = sparse_basis(params, bs);
  Eigen::MatrixXcd big(m * np, cols * cols);
  for (int j = 0; j < np; ++j) {
    const auto [dr, dc] =
        delay_diagonals(params, bs, pilots.subcarrier_indices[j], pilots.f0);
    const Eigen::RowVectorXcd va = pilots.downlink.col(j).transpose() * a;
    const Eigen::MatrixXcd ad = a * dr.asDiagonal();
    // (1 x cols) kron (m x cols)
    for (int p = 0; p < cols; ++p) {
      big.block(j * m, p * cols, m, cols) = va(p) * ad;
    }
  }
  return big;
}

}  // namespace isacsim::oracle
