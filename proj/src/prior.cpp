#include "isacsim/prior.hpp"

#include <stdexcept>

namespace isacsim {

PriorHyperParams PriorHyperParams::uniform_slab(int size, double lambda,
                                                double rho_r, double rho_c,
                                                double slab_var) {
  PriorHyperParams h;
  h.lambda = lambda;
  h.rho_r = rho_r;
  h.rho_c = rho_c;
  h.slab_var_r = Eigen::VectorXd::Constant(size, slab_var);
  h.slab_var_c = Eigen::VectorXd::Constant(size, slab_var);
  h.validate();
  return h;
}

void PriorHyperParams::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob_ok(lambda) || !prob_ok(rho_r) || !prob_ok(rho_c)) {
    throw std::invalid_argument("support probabilities must lie in [0,1]");
  }
  if ((slab_var_r.array() <= 0).any() || (slab_var_c.array() <= 0).any()) {
    throw std::invalid_argument("slab variances must be strictly positive");
  }
}

SupportTriple sample_supports(const PriorHyperParams& hyper, int size,
                              Rng& rng) {
  SupportTriple t;
  t.resize(size);
  for (int q = 0; q < size; ++q) {
    if (rng.bernoulli(hyper.lambda)) {
      t.s[q] = 1;
      t.s_r[q] = rng.bernoulli(hyper.rho_r) ? 1 : 0;
      t.s_c[q] = rng.bernoulli(hyper.rho_c) ? 1 : 0;
    }
  }
  return t;
}

GainPair sample_gains(const SupportTriple& supports,
                      const PriorHyperParams& hyper, Rng& rng) {
  const int n = supports.size();
  if (hyper.slab_var_r.size() != n || hyper.slab_var_c.size() != n) {
    throw std::invalid_argument("slab variance size mismatch");
  }
  GainPair g;
  g.x_r = Eigen::VectorXcd::Zero(n);
  g.x_c = Eigen::VectorXcd::Zero(n);
  for (int q = 0; q < n; ++q) {
    if (supports.s_r[q]) g.x_r(q) = rng.complex_gaussian(hyper.slab_var_r(q));
    if (supports.s_c[q]) g.x_c(q) = rng.complex_gaussian(hyper.slab_var_c(q));
  }
  return g;
}

}  // namespace isacsim
