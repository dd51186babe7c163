#include "isacsim/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isacsim {

MatchResult localization_rmse(const std::vector<Position>& detections,
                              const std::vector<Position>& truth,
                              double gate_radius) {
  MatchResult out;
  const int nd = static_cast<int>(detections.size());
  const int nt = static_cast<int>(truth.size());
  std::vector<bool> d_used(nd, false), t_used(nt, false);

  double sq_sum = 0.0;
  while (true) {
    double best = gate_radius;
    int bd = -1, bt = -1;
    for (int i = 0; i < nd; ++i) {
      if (d_used[i]) continue;
      for (int j = 0; j < nt; ++j) {
        if (t_used[j]) continue;
        const double dist = distance(detections[i], truth[j]);
        if (dist <= best) {
          best = dist;
          bd = i;
          bt = j;
        }
      }
    }
    if (bd < 0) break;
    d_used[bd] = true;
    t_used[bt] = true;
    out.pairs.emplace_back(bd, bt);
    sq_sum += best * best;
  }

  for (int i = 0; i < nd; ++i) {
    if (!d_used[i]) ++out.false_alarms;
  }
  for (int j = 0; j < nt; ++j) {
    if (!t_used[j]) ++out.misses;
  }
  if (out.pairs.empty()) {
    out.rmse = gate_radius;  // penalty convention
    out.misses = nt;
  } else {
    out.rmse = std::sqrt(sq_sum / out.pairs.size());
  }
  return out;
}

namespace {
template <typename T>
double nmse_impl(const std::vector<T>& est, const std::vector<T>& truth) {
  if (est.size() != truth.size()) {
    throw std::invalid_argument("channel_nmse: shape mismatch");
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (est[i].rows() != truth[i].rows() || est[i].cols() != truth[i].cols()) {
      throw std::invalid_argument("channel_nmse: shape mismatch");
    }
    num += (est[i] - truth[i]).squaredNorm();
    den += truth[i].squaredNorm();
  }
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}
}  // namespace

double channel_nmse(const std::vector<Eigen::MatrixXcd>& est,
                    const std::vector<Eigen::MatrixXcd>& truth) {
  return nmse_impl(est, truth);
}

double channel_nmse(const std::vector<Eigen::VectorXcd>& est,
                    const std::vector<Eigen::VectorXcd>& truth) {
  return nmse_impl(est, truth);
}

}  // namespace isacsim
