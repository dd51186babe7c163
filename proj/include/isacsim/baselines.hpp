#pragma once

#include "isacsim/solver.hpp"

namespace isacsim {

struct OmpConfig {
  int max_atoms = 0;          // 0: stop on residual_tol only
  double residual_tol = 1e-3; // relative residual norm
};

struct OmpResult {
  std::vector<int> support;          // selected columns in pick order
  Eigen::VectorXcd coefficients;     // full-length, zero off the support
  std::vector<double> residual_norms;  // after each selection
};

/// Greedy selection of the column with the largest normalized correlation to
/// the residual, with a least-squares refit of all selected columns per round.
OmpResult omp(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& phi,
              const OmpConfig& cfg);

/// Separate-estimation baseline: OMP on each branch over the fixed uniform
/// grid. Positions are read from grid points; the user position and the time
/// offset stay at their prior values.
Estimates omp_estimate(const Observation& obs, const PilotSet& pilots,
                       const ProblemSetup& setup, const OmpConfig& radar_cfg,
                       const OmpConfig& comm_cfg);

/// Joint-prior turbo recovery with the sensing parameters frozen at their
/// initialization (fixed uniform grid).
Estimates fixed_grid_estimate(const Observation& obs, const PilotSet& pilots,
                              const ProblemSetup& setup,
                              const PriorHyperParams& hyper, SolverConfig cfg);

/// Full dynamic-grid algorithm without the joint support layer; each branch
/// keeps an independent Bernoulli(lambda * rho_t) activity prior.
Estimates separate_estimate(const Observation& obs, const PilotSet& pilots,
                            const ProblemSetup& setup,
                            const PriorHyperParams& hyper, SolverConfig cfg);

}  // namespace isacsim
