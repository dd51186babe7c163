#pragma once

#include <array>
#include <vector>

#include "isacsim/mstep.hpp"
#include "isacsim/turbo.hpp"

namespace isacsim {

enum class SolverMode { kJoint, kSeparate, kFixedGrid };

struct SolverConfig {
  SolverMode mode = SolverMode::kJoint;
  int em_max_iters = 30;
  double em_tol = 1e-3;  // meters-dominated change norm
  TurboControl turbo;
  double detection_threshold = 0.5;
  // M-step controls
  double active_threshold = 0.1;
  int max_active = 64;            // cap on refined grid points per iteration
  double collision_radius = 0.0;  // meters
  double step_pos = 1.0;
  double step_tau = 1e-8;
  double step_decay = 0.8;
  double armijo_c1 = 1e-4;
  double armijo_shrink = 0.5;
  int armijo_max_backtracks = 20;
};

struct Detection {
  Position pos;
  std::complex<double> gain;
  double prob = 0.0;
  int column = -1;
};

struct Estimates {
  std::vector<Detection> targets;
  std::vector<Detection> scatterers;
  Position user_pos;
  double time_offset = 0.0;
  SupportTriple support;                   // MAP support over all columns
  Eigen::VectorXcd x_mmse_r, x_mmse_c;     // posterior-mean coefficients
  Eigen::VectorXd support_prob_r, support_prob_c;
  std::vector<Eigen::MatrixXcd> channel_r;  // per pilot subcarrier
  std::vector<Eigen::VectorXcd> channel_c;
  SensingParams params;                     // final sensing parameters
  // diagnostics
  int em_iters = 0;
  bool estep_converged = true;
  std::vector<std::array<double, 2>> surrogate_steps;  // (before, after) per M-step
};

/// Static problem description shared by all estimators.
struct ProblemSetup {
  BaseStation bs;
  GridSpec grid;
  SensingPrior prior;
};

/// Reassembles the per-subcarrier channels from location-domain coefficients.
std::pair<std::vector<Eigen::MatrixXcd>, std::vector<Eigen::VectorXcd>>
reconstruct_channels(const Eigen::VectorXcd& x_r, const Eigen::VectorXcd& x_c,
                     const SensingParams& params, const PilotSet& pilots,
                     const BaseStation& bs);

/// Full estimator: alternates the turbo E-step with the gradient-ascent
/// M-step over the sensing parameters until the parameter change falls below
/// em_tol. kFixedGrid freezes the sensing parameters at their initialization;
/// kSeparate drops the joint support layer.
Estimates solve(const Observation& obs, const PilotSet& pilots,
                const ProblemSetup& setup, const PriorHyperParams& hyper,
                const SolverConfig& cfg);

}  // namespace isacsim
