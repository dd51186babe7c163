#pragma once

#include <string>
#include <vector>

#include "isacsim/config.hpp"

namespace isacsim {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the oracle-equivalence and consistency checks on the given
/// configuration: Module B vs enumeration, Module A vs direct Gaussian
/// conditioning, analytic vs finite-difference gradients, on-grid
/// representation consistency, and the Kronecker column selection.
std::vector<ValidationCheck> run_validation_checks(const ExperimentConfig& cfg);

}  // namespace isacsim
