#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "isacsim/geometry.hpp"

namespace isacsim {

struct MatchResult {
  double rmse = 0.0;
  int misses = 0;
  int false_alarms = 0;
  std::vector<std::pair<int, int>> pairs;  // (detection index, truth index)
};

/// Greedy mutual-nearest-neighbor matching within the gate radius: the
/// globally closest unmatched pair is paired first. RMSE is over matched
/// pairs; with no matched pair at all the gate radius is reported as a
/// penalty and every truth counts as a miss.
MatchResult localization_rmse(const std::vector<Position>& detections,
                              const std::vector<Position>& truth,
                              double gate_radius);

/// sum_n ||est_n - truth_n||_F^2 / sum_n ||truth_n||_F^2.
/// NaN when the truth has zero energy.
double channel_nmse(const std::vector<Eigen::MatrixXcd>& est,
                    const std::vector<Eigen::MatrixXcd>& truth);
double channel_nmse(const std::vector<Eigen::VectorXcd>& est,
                    const std::vector<Eigen::VectorXcd>& truth);

}  // namespace isacsim
