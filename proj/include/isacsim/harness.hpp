#pragma once

#include <string>
#include <vector>

#include "isacsim/config.hpp"
#include "isacsim/metrics.hpp"

namespace isacsim {

/// One row of the sweep output.
struct SweepRecord {
  std::string method;
  double snr_db = 0.0;
  int trial = 0;
  std::string status = "ok";
  double rmse_target = 0.0;
  double rmse_scatterer = 0.0;
  double nmse_radar = 0.0;
  double nmse_comm = 0.0;
  int miss_count = 0;
  int false_alarm_count = 0;
  double user_pos_error = 0.0;
  double tau_offset_error = 0.0;
  int em_iters = 0;
};

/// Ground truth and observation of one Monte Carlo trial. The scene, the
/// pilots and the unit-variance noise direction depend on (seed, trial) only,
/// so SNR points and methods see paired realizations.
struct TrialData {
  Scene scene;
  PilotSet pilots;
  Observation obs;  // scaled noise already added
  std::vector<Eigen::MatrixXcd> truth_channel_r;
  std::vector<Eigen::VectorXcd> truth_channel_c;
};

TrialData make_trial(const ExperimentConfig& cfg, int trial, double snr_db);

/// Runs one method on one trial and scores it against the truth.
struct TrialOutcome {
  SweepRecord record;
  Estimates estimates;
};
TrialOutcome run_trial(const ExperimentConfig& cfg, const std::string& method,
                       double snr_db, int trial);
TrialOutcome run_trial(const ExperimentConfig& cfg, const std::string& method,
                       double snr_db, int trial, const TrialData& data);

/// Full Monte Carlo sweep over methods x SNR points x trials; rows come back
/// ordered by (method, snr, trial) regardless of the worker count.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg);

/// Aggregate statistics of one (method, SNR) cell.
struct AggregateRow {
  std::string method;
  double snr_db = 0.0;
  int trials_ok = 0;
  double mean_rmse_target = 0.0, se_rmse_target = 0.0;
  double mean_rmse_scatterer = 0.0, se_rmse_scatterer = 0.0;
  double mean_nmse_radar = 0.0, se_nmse_radar = 0.0;
  double mean_nmse_comm = 0.0, se_nmse_comm = 0.0;
  double mean_user_pos_error = 0.0;
  double mean_tau_offset_error = 0.0;
  double mean_miss = 0.0;
  double mean_false_alarm = 0.0;
};
std::vector<AggregateRow> aggregate_records(const std::vector<SweepRecord>& records);

std::string records_to_csv(const std::vector<SweepRecord>& records);
std::string aggregates_to_csv(const std::vector<AggregateRow>& rows);
void write_file(const std::string& path, const std::string& content);

/// Static RMSE / NMSE-vs-SNR line plots from the aggregate table.
std::string rmse_svg(const std::vector<AggregateRow>& rows);
std::string nmse_svg(const std::vector<AggregateRow>& rows);

/// Human-readable report of a single trial (used by the `simulate` command).
std::string trial_report(const ExperimentConfig& cfg, const std::string& method,
                         double snr_db, int trial);

}  // namespace isacsim
