#include "isacsim/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isacsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const std::complex<double> kI(0.0, 1.0);

std::complex<double> delay_phase(int n, double f0, double tau) {
  return std::polar(1.0, -kTwoPi * n * f0 * tau);
}
}  // namespace

PilotSet make_pilots(const ArrayGeometry& geom, int num_subcarriers,
                     int spacing, double f0, Rng& rng) {
  if (spacing < 1 || num_subcarriers < spacing) {
    throw std::invalid_argument("pilot spacing must lie in [1, N]");
  }
  PilotSet p;
  p.f0 = f0;
  for (int n = spacing; n <= num_subcarriers; n += spacing) {
    p.subcarrier_indices.push_back(n);
  }
  const int np = p.count();
  const int m = geom.num_antennas;
  p.downlink.resize(m, np);
  p.uplink.resize(np);
  for (int j = 0; j < np; ++j) {
    Eigen::VectorXcd v(m);
    for (int i = 0; i < m; ++i) v(i) = rng.complex_gaussian(1.0);
    p.downlink.col(j) = v / v.norm();
    // QPSK symbol
    const int sym = static_cast<int>(rng.below(4));
    p.uplink(j) = std::polar(1.0, std::numbers::pi / 4 + sym * std::numbers::pi / 2);
  }
  return p;
}

Eigen::MatrixXcd radar_channel_matrix(const Scene& scene, const BaseStation& bs,
                                      int n, double f0) {
  const int m = bs.array.num_antennas;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
  auto add = [&](const Position& p, std::complex<double> gain) {
    if (gain == std::complex<double>(0.0, 0.0)) return;
    const Eigen::VectorXcd a = steering(aoa(bs.pos, p), bs.array);
    h += gain * delay_phase(n, f0, radar_delay(bs.pos, p)) * (a * a.transpose());
  };
  add(scene.user, scene.user_radar_gain);
  for (const auto& t : scene.targets) add(t.pos, t.gain);
  return h;
}

Eigen::VectorXcd comm_channel_vector(const Scene& scene, const BaseStation& bs,
                                     int n, double f0) {
  const int m = bs.array.num_antennas;
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(m);
  auto add = [&](const Position& p, std::complex<double> gain, double rel_delay) {
    if (gain == std::complex<double>(0.0, 0.0)) return;
    const Eigen::VectorXcd a = steering(aoa(bs.pos, p), bs.array);
    h += gain * delay_phase(n, f0, rel_delay + scene.time_offset) * a;
  };
  add(scene.user, scene.los_gain, 0.0);
  for (const auto& s : scene.scatterers) {
    add(s.pos, s.gain, comm_relative_delay(bs.pos, s.pos, scene.user));
  }
  return h;
}

Eigen::MatrixXcd sparse_basis(const SensingParams& params, const BaseStation& bs) {
  const int cols = params.num_columns();
  Eigen::MatrixXcd a(bs.array.num_antennas, cols);
  for (int q = 0; q < cols; ++q) {
    a.col(q) = steering(aoa(bs.pos, params.column_position(q)), bs.array);
  }
  return a;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> delay_diagonals(
    const SensingParams& params, const BaseStation& bs, int n, double f0) {
  const int cols = params.num_columns();
  Eigen::VectorXcd dr(cols), dc(cols);
  dr(0) = delay_phase(n, f0, radar_delay(bs.pos, params.user_pos));
  dc(0) = delay_phase(n, f0, params.time_offset);
  for (int q = 1; q < cols; ++q) {
    dr(q) = delay_phase(n, f0, radar_delay(bs.pos, params.grid[q - 1]));
    dc(q) = delay_phase(
        n, f0,
        comm_relative_delay(bs.pos, params.grid[q - 1], params.user_pos) +
            params.time_offset);
  }
  return {dr, dc};
}

Eigen::MatrixXcd comm_measurement_matrix(const SensingParams& params,
                                         const PilotSet& pilots,
                                         const BaseStation& bs) {
  return make_comm_model(params, pilots, bs).full_matrix();
}

Eigen::MatrixXcd radar_measurement_matrix(const SensingParams& params,
                                          const PilotSet& pilots,
                                          const BaseStation& bs) {
  return make_radar_model(params, pilots, bs).full_matrix();
}

Eigen::VectorXcd radar_signal(const Scene& scene, const PilotSet& pilots,
                              const BaseStation& bs) {
  const int m = bs.array.num_antennas;
  const int np = pilots.count();
  Eigen::VectorXcd y(m * np);
  for (int j = 0; j < np; ++j) {
    const auto h = radar_channel_matrix(scene, bs, pilots.subcarrier_indices[j],
                                        pilots.f0);
    y.segment(j * m, m) = h * pilots.downlink.col(j);
  }
  return y;
}

Eigen::VectorXcd comm_signal(const Scene& scene, const PilotSet& pilots,
                             const BaseStation& bs) {
  const int m = bs.array.num_antennas;
  const int np = pilots.count();
  Eigen::VectorXcd y(m * np);
  for (int j = 0; j < np; ++j) {
    const auto h = comm_channel_vector(scene, bs, pilots.subcarrier_indices[j],
                                       pilots.f0);
    y.segment(j * m, m) = h * pilots.uplink(j);
  }
  return y;
}

Observation synthesize_observation(const Scene& scene, const PilotSet& pilots,
                                   const BaseStation& bs, double noise_var_r,
                                   double noise_var_c, uint64_t seed) {
  Observation obs;
  obs.noise_var_r = noise_var_r;
  obs.noise_var_c = noise_var_c;
  obs.y_r = radar_signal(scene, pilots, bs);
  obs.y_c = comm_signal(scene, pilots, bs);
  Rng rng(mix_seed(seed));
  for (Eigen::Index i = 0; i < obs.y_r.size(); ++i) {
    obs.y_r(i) += rng.complex_gaussian(noise_var_r);
  }
  for (Eigen::Index i = 0; i < obs.y_c.size(); ++i) {
    obs.y_c(i) += rng.complex_gaussian(noise_var_c);
  }
  return obs;
}

Eigen::MatrixXcd BranchModel::gram() const {
  return (basis.adjoint() * basis).cwiseProduct(coef.adjoint() * coef);
}

Eigen::VectorXcd BranchModel::apply(const Eigen::VectorXcd& x) const {
  const int m = static_cast<int>(basis.rows());
  const int np = static_cast<int>(coef.rows());
  Eigen::VectorXcd y(m * np);
  for (int j = 0; j < np; ++j) {
    y.segment(j * m, m) = basis * coef.row(j).transpose().cwiseProduct(x);
  }
  return y;
}

Eigen::VectorXcd BranchModel::adjoint_apply(const Eigen::VectorXcd& y) const {
  const int m = static_cast<int>(basis.rows());
  const int np = static_cast<int>(coef.rows());
  Eigen::Map<const Eigen::MatrixXcd> ymat(y.data(), m, np);
  // [q] = sum_j conj(coef(j,q)) * (a_q^H y_j)
  return (basis.adjoint() * ymat).cwiseProduct(coef.adjoint()).rowwise().sum();
}

Eigen::MatrixXcd BranchModel::full_matrix() const {
  const int m = static_cast<int>(basis.rows());
  const int np = static_cast<int>(coef.rows());
  Eigen::MatrixXcd phi(m * np, cols());
  for (int j = 0; j < np; ++j) {
    phi.middleRows(j * m, m) = basis * coef.row(j).asDiagonal();
  }
  return phi;
}

Eigen::VectorXcd BranchModel::column(int q) const {
  const int m = static_cast<int>(basis.rows());
  const int np = static_cast<int>(coef.rows());
  Eigen::VectorXcd col(m * np);
  for (int j = 0; j < np; ++j) col.segment(j * m, m) = coef(j, q) * basis.col(q);
  return col;
}

namespace {
BranchModel make_common(const SensingParams& params, const PilotSet& pilots,
                        const BaseStation& bs) {
  BranchModel mdl;
  const int cols = params.num_columns();
  const int np = pilots.count();
  mdl.basis = sparse_basis(params, bs);
  mdl.theta.resize(cols);
  for (int q = 0; q < cols; ++q) {
    mdl.theta(q) = aoa(bs.pos, params.column_position(q));
  }
  mdl.omega.resize(np);
  for (int j = 0; j < np; ++j) {
    mdl.omega(j) = kTwoPi * pilots.subcarrier_indices[j] * pilots.f0;
  }
  mdl.tau.resize(cols);
  return mdl;
}
}  // namespace

BranchModel make_radar_model(const SensingParams& params, const PilotSet& pilots,
                             const BaseStation& bs) {
  BranchModel mdl = make_common(params, pilots, bs);
  const int cols = params.num_columns();
  const int np = pilots.count();
  for (int q = 0; q < cols; ++q) {
    mdl.tau(q) = radar_delay(bs.pos, params.column_position(q));
  }
  mdl.couple = (pilots.downlink.transpose() * mdl.basis);  // (j,q) = v_j^T a_q
  mdl.phase.resize(np, cols);
  for (int j = 0; j < np; ++j) {
    for (int q = 0; q < cols; ++q) {
      mdl.phase(j, q) = std::polar(1.0, -mdl.omega(j) * mdl.tau(q));
    }
  }
  mdl.coef = mdl.couple.cwiseProduct(mdl.phase);
  return mdl;
}

Eigen::VectorXcd radar_column_for(const Position& pos, const PilotSet& pilots,
                                  const BaseStation& bs) {
  const int m = bs.array.num_antennas;
  const int np = pilots.count();
  const Eigen::VectorXcd a = steering(aoa(bs.pos, pos), bs.array);
  const double tau = radar_delay(bs.pos, pos);
  Eigen::VectorXcd col(m * np);
  for (int j = 0; j < np; ++j) {
    const std::complex<double> couple =
        pilots.downlink.col(j).cwiseProduct(a).sum();  // v_j^T a
    col.segment(j * m, m) =
        couple * delay_phase(pilots.subcarrier_indices[j], pilots.f0, tau) * a;
  }
  return col;
}

Eigen::VectorXcd comm_column_for(const Position& pos, const Position& user,
                                 double time_offset, const PilotSet& pilots,
                                 const BaseStation& bs) {
  const int m = bs.array.num_antennas;
  const int np = pilots.count();
  const Eigen::VectorXcd a = steering(aoa(bs.pos, pos), bs.array);
  const double tau = comm_relative_delay(bs.pos, pos, user) + time_offset;
  Eigen::VectorXcd col(m * np);
  for (int j = 0; j < np; ++j) {
    col.segment(j * m, m) =
        pilots.uplink(j) *
        delay_phase(pilots.subcarrier_indices[j], pilots.f0, tau) * a;
  }
  return col;
}

BranchModel make_comm_model(const SensingParams& params, const PilotSet& pilots,
                            const BaseStation& bs) {
  BranchModel mdl = make_common(params, pilots, bs);
  const int cols = params.num_columns();
  const int np = pilots.count();
  mdl.tau(0) = params.time_offset;
  for (int q = 1; q < cols; ++q) {
    mdl.tau(q) =
        comm_relative_delay(bs.pos, params.grid[q - 1], params.user_pos) +
        params.time_offset;
  }
  mdl.couple.resize(np, cols);
  mdl.phase.resize(np, cols);
  for (int j = 0; j < np; ++j) {
    for (int q = 0; q < cols; ++q) {
      mdl.couple(j, q) = pilots.uplink(j);
      mdl.phase(j, q) = std::polar(1.0, -mdl.omega(j) * mdl.tau(q));
    }
  }
  mdl.coef = mdl.couple.cwiseProduct(mdl.phase);
  return mdl;
}

}  // namespace isacsim
