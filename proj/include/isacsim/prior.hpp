#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "isacsim/rng.hpp"

namespace isacsim {

/// Hyperparameters of the three-layer sparse prior: a joint support vector
/// gates two branch supports (radar / communication), which in turn gate
/// spike-and-slab coefficients.
struct PriorHyperParams {
  double lambda = 0.1;  // P(s_q = 1)
  double rho_r = 0.5;   // P(s_q^r = 1 | s_q = 1)
  double rho_c = 0.5;   // P(s_q^c = 1 | s_q = 1)
  Eigen::VectorXd slab_var_r;  // per-index slab variance, size Q+1
  Eigen::VectorXd slab_var_c;

  static PriorHyperParams uniform_slab(int size, double lambda, double rho_r,
                                       double rho_c, double slab_var = 1.0);
  void validate() const;
};

/// Joint and per-branch support bits; branch supports never exceed the
/// joint support elementwise.
struct SupportTriple {
  std::vector<uint8_t> s;
  std::vector<uint8_t> s_r;
  std::vector<uint8_t> s_c;

  int size() const { return static_cast<int>(s.size()); }
  void resize(int n) {
    s.assign(n, 0);
    s_r.assign(n, 0);
    s_c.assign(n, 0);
  }
};

/// Draws (s, s^r, s^c) for `size` independent indices: s_q ~ Bernoulli(lambda),
/// and given s_q = 1 the branch bits are Bernoulli(rho_r) / Bernoulli(rho_c).
SupportTriple sample_supports(const PriorHyperParams& hyper, int size, Rng& rng);

/// Draws coefficients given supports: zero on inactive indices, complex
/// Gaussian with the slab variance on active ones.
struct GainPair {
  Eigen::VectorXcd x_r;
  Eigen::VectorXcd x_c;
};
GainPair sample_gains(const SupportTriple& supports,
                      const PriorHyperParams& hyper, Rng& rng);

}  // namespace isacsim
