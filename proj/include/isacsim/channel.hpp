#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "isacsim/geometry.hpp"
#include "isacsim/scene.hpp"

namespace isacsim {

/// BS-side constants shared by both channels.
struct BaseStation {
  Position pos;
  ArrayGeometry array;
};

/// Sensing parameters xi = {r, p_u, tau_o}: the dynamic position grid, the
/// user position estimate and the time offset estimate.
struct SensingParams {
  std::vector<Position> grid;  // Q points; column q of the basis is grid[q-1]
  Position user_pos;
  double time_offset = 0.0;

  int num_columns() const { return static_cast<int>(grid.size()) + 1; }
  /// Position behind basis column q; q = 0 maps to the user.
  const Position& column_position(int q) const {
    return q == 0 ? user_pos : grid[q - 1];
  }
};

/// Downlink/uplink pilot symbols on the pilot subcarriers.
struct PilotSet {
  Eigen::MatrixXcd downlink;            // M x N_p, unit-norm columns (v_n)
  Eigen::VectorXcd uplink;              // N_p, unit modulus (u_n)
  std::vector<int> subcarrier_indices;  // strictly increasing, within [1, N]
  double f0 = 30e3;                     // subcarrier interval, Hz

  int count() const { return static_cast<int>(subcarrier_indices.size()); }
};

/// Pilot subcarriers n = spacing, 2*spacing, ..., N; downlink beams are
/// unit-norm complex Gaussian, uplink symbols QPSK.
PilotSet make_pilots(const ArrayGeometry& geom, int num_subcarriers,
                     int spacing, double f0, Rng& rng);

/// Stacked noisy observations of one trial.
struct Observation {
  Eigen::VectorXcd y_r;  // M * N_p
  Eigen::VectorXcd y_c;  // M * N_p
  double noise_var_r = 0.0;
  double noise_var_c = 0.0;
};

/// Radar channel matrix on subcarrier n: sum over the user (k = 0) and all
/// targets of x_k * exp(-j 2 pi n f0 tau_k) * a(theta_k) a(theta_k)^T.
/// Complex-symmetric, not Hermitian.
Eigen::MatrixXcd radar_channel_matrix(const Scene& scene, const BaseStation& bs,
                                      int n, double f0);

/// Communication channel vector on subcarrier n: LoS (l = 0, zero relative
/// delay) plus one term per scatterer, all rotated by the time offset.
Eigen::VectorXcd comm_channel_vector(const Scene& scene, const BaseStation& bs,
                                     int n, double f0);

/// Location-domain basis A(r, p_u): column 0 is the user steering vector,
/// column q the steering vector of grid point q.
Eigen::MatrixXcd sparse_basis(const SensingParams& params, const BaseStation& bs);

/// Diagonal delay-phase entries of D_n^r and D_n^c (all unit modulus).
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> delay_diagonals(
    const SensingParams& params, const BaseStation& bs, int n, double f0);

/// Stacked communication measurement matrix: block n is u_n * A * diag(D_n^c).
Eigen::MatrixXcd comm_measurement_matrix(const SensingParams& params,
                                         const PilotSet& pilots,
                                         const BaseStation& bs);

/// Stacked radar measurement matrix; column q of block n is
/// (a_q^T v_n) * D_n^r[q] * a_q, the diagonal column selection of the
/// Kronecker-structured dictionary.
Eigen::MatrixXcd radar_measurement_matrix(const SensingParams& params,
                                          const PilotSet& pilots,
                                          const BaseStation& bs);

/// Noiseless stacked pilot responses of the true scene.
Eigen::VectorXcd radar_signal(const Scene& scene, const PilotSet& pilots,
                              const BaseStation& bs);
Eigen::VectorXcd comm_signal(const Scene& scene, const PilotSet& pilots,
                             const BaseStation& bs);

/// Noisy observation; deterministic for a fixed seed.
Observation synthesize_observation(const Scene& scene, const PilotSet& pilots,
                                   const BaseStation& bs, double noise_var_r,
                                   double noise_var_c, uint64_t seed);

/// One measurement branch in factored form: block j of column q equals
/// coef(j, q) * basis(:, q). Keeping the factors avoids materializing Phi in
/// the hot loops; gram() and adjoint_apply() work on (Q+1)-sized objects.
struct BranchModel {
  Eigen::MatrixXcd basis;   // M x (Q+1), unit-norm columns
  Eigen::MatrixXcd couple;  // N_p x (Q+1): a_q^T v_j (radar) or u_j (comm)
  Eigen::MatrixXcd phase;   // N_p x (Q+1), unit-modulus delay phases
  Eigen::MatrixXcd coef;    // couple .* phase
  Eigen::VectorXd theta;    // Q+1 column angles
  Eigen::VectorXd tau;      // Q+1 column delays (radar: tau^r; comm: tau^c + tau_o)
  Eigen::VectorXd omega;    // N_p angular pilot frequencies 2 pi n f0

  int rows() const { return static_cast<int>(basis.rows() * couple.rows()); }
  int cols() const { return static_cast<int>(basis.cols()); }

  Eigen::MatrixXcd gram() const;                               // Phi^H Phi
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;     // Phi x
  Eigen::VectorXcd adjoint_apply(const Eigen::VectorXcd& y) const;  // Phi^H y
  Eigen::MatrixXcd full_matrix() const;
  Eigen::VectorXcd column(int q) const;
};

BranchModel make_radar_model(const SensingParams& params, const PilotSet& pilots,
                             const BaseStation& bs);
BranchModel make_comm_model(const SensingParams& params, const PilotSet& pilots,
                            const BaseStation& bs);

/// Stacked measurement column of a single candidate position, matching
/// radar_measurement_matrix / comm_measurement_matrix column q >= 1.
Eigen::VectorXcd radar_column_for(const Position& pos, const PilotSet& pilots,
                                  const BaseStation& bs);
Eigen::VectorXcd comm_column_for(const Position& pos, const Position& user,
                                 double time_offset, const PilotSet& pilots,
                                 const BaseStation& bs);

}  // namespace isacsim
