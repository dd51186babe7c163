#include "isacsim/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace isacsim {

namespace {

constexpr uint64_t kSceneStream = 0x5ce17e;
constexpr uint64_t kNoiseStream = 0x7015e;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double snr_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

}  // namespace

TrialData make_trial(const ExperimentConfig& cfg, int trial, double snr_db) {
  TrialData data;
  const auto setup = cfg.problem_setup();
  Rng scene_rng(derive_seed(cfg.seed, kSceneStream, trial));
  data.scene = scene_from_counts(cfg.scene_gen(), setup.grid, setup.bs.pos, scene_rng);
  data.pilots = make_pilots(setup.bs.array, cfg.subcarriers, cfg.pilot_spacing,
                            cfg.f0, scene_rng);

  const Eigen::VectorXcd sig_r = radar_signal(data.scene, data.pilots, setup.bs);
  const Eigen::VectorXcd sig_c = comm_signal(data.scene, data.pilots, setup.bs);
  const double snr = snr_linear(snr_db);
  const auto len = static_cast<double>(sig_r.size());
  data.obs.noise_var_r = std::max(sig_r.squaredNorm(), 1e-30) / (len * snr);
  data.obs.noise_var_c = std::max(sig_c.squaredNorm(), 1e-30) / (len * snr);

  Rng noise_rng(derive_seed(cfg.seed, kNoiseStream, trial));
  data.obs.y_r = sig_r;
  data.obs.y_c = sig_c;
  const double sd_r = std::sqrt(data.obs.noise_var_r);
  const double sd_c = std::sqrt(data.obs.noise_var_c);
  for (Eigen::Index i = 0; i < sig_r.size(); ++i) {
    data.obs.y_r(i) += sd_r * noise_rng.complex_gaussian(1.0);
  }
  for (Eigen::Index i = 0; i < sig_c.size(); ++i) {
    data.obs.y_c(i) += sd_c * noise_rng.complex_gaussian(1.0);
  }

  data.truth_channel_r.reserve(data.pilots.count());
  data.truth_channel_c.reserve(data.pilots.count());
  for (int j = 0; j < data.pilots.count(); ++j) {
    const int n = data.pilots.subcarrier_indices[j];
    data.truth_channel_r.push_back(
        radar_channel_matrix(data.scene, setup.bs, n, cfg.f0));
    data.truth_channel_c.push_back(
        comm_channel_vector(data.scene, setup.bs, n, cfg.f0));
  }
  return data;
}

namespace {

Estimates dispatch_method(const ExperimentConfig& cfg, const std::string& method,
                          const TrialData& data) {
  const auto setup = cfg.problem_setup();
  if (method == "omp") {
    OmpConfig radar_cfg, comm_cfg;
    radar_cfg.residual_tol = cfg.omp_residual_tol;
    comm_cfg.residual_tol = cfg.omp_residual_tol;
    if (cfg.omp_known_counts) {
      radar_cfg.max_atoms = cfg.num_targets + 1;
      comm_cfg.max_atoms = cfg.num_scatterers + 1;
      radar_cfg.residual_tol = 0.0;
      comm_cfg.residual_tol = 0.0;
    }
    return omp_estimate(data.obs, data.pilots, setup, radar_cfg, comm_cfg);
  }
  const auto hyper = cfg.hyper_params();
  if (method == "fixed_grid") {
    return fixed_grid_estimate(data.obs, data.pilots, setup, hyper,
                               cfg.solver_config(SolverMode::kFixedGrid));
  }
  if (method == "separate") {
    return separate_estimate(data.obs, data.pilots, setup, hyper,
                             cfg.solver_config(SolverMode::kSeparate));
  }
  if (method == "joint") {
    return solve(data.obs, data.pilots, setup, hyper,
                 cfg.solver_config(SolverMode::kJoint));
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

std::vector<Position> positions_of(const std::vector<Detection>& dets) {
  std::vector<Position> out;
  out.reserve(dets.size());
  for (const auto& d : dets) out.push_back(d.pos);
  return out;
}

std::vector<Position> positions_of(const std::vector<SceneEntity>& ents) {
  std::vector<Position> out;
  out.reserve(ents.size());
  for (const auto& e : ents) out.push_back(e.pos);
  return out;
}

}  // namespace

TrialOutcome run_trial(const ExperimentConfig& cfg, const std::string& method,
                       double snr_db, int trial, const TrialData& data) {
  TrialOutcome out;
  out.record.method = method;
  out.record.snr_db = snr_db;
  out.record.trial = trial;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    out.estimates = dispatch_method(cfg, method, data);
    const double gate = 2.0 * cfg.resolution;
    const auto mt = localization_rmse(positions_of(out.estimates.targets),
                                      positions_of(data.scene.targets), gate);
    const auto ms = localization_rmse(positions_of(out.estimates.scatterers),
                                      positions_of(data.scene.scatterers), gate);
    out.record.rmse_target = mt.rmse;
    out.record.rmse_scatterer = ms.rmse;
    out.record.miss_count = mt.misses + ms.misses;
    out.record.false_alarm_count = mt.false_alarms + ms.false_alarms;
    out.record.nmse_radar =
        channel_nmse(out.estimates.channel_r, data.truth_channel_r);
    out.record.nmse_comm =
        channel_nmse(out.estimates.channel_c, data.truth_channel_c);
    out.record.user_pos_error = distance(out.estimates.user_pos, data.scene.user);
    out.record.tau_offset_error =
        std::abs(out.estimates.time_offset - data.scene.time_offset);
    out.record.em_iters = out.estimates.em_iters;
  } catch (const std::exception& ex) {
    out.record.status = std::string("error: ") + ex.what();
    out.record.rmse_target = nan;
    out.record.rmse_scatterer = nan;
    out.record.nmse_radar = nan;
    out.record.nmse_comm = nan;
    out.record.user_pos_error = nan;
    out.record.tau_offset_error = nan;
  }
  return out;
}

TrialOutcome run_trial(const ExperimentConfig& cfg, const std::string& method,
                       double snr_db, int trial) {
  return run_trial(cfg, method, snr_db, trial, make_trial(cfg, trial, snr_db));
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Item {
    int method_idx;
    int snr_idx;
    int trial;
  };
  std::vector<Item> items;
  for (int m = 0; m < static_cast<int>(cfg.methods.size()); ++m) {
    for (int s = 0; s < static_cast<int>(cfg.snr_db.size()); ++s) {
      for (int t = 0; t < cfg.trials; ++t) items.push_back({m, s, t});
    }
  }

  std::vector<SweepRecord> records(items.size());
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int workers =
      std::max(1, std::min<int>(cfg.workers > 0 ? cfg.workers : hw,
                                static_cast<int>(items.size())));

  std::atomic<size_t> next{0};
  auto work = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const Item& it = items[i];
      const auto data = make_trial(cfg, it.trial, cfg.snr_db[it.snr_idx]);
      records[i] = run_trial(cfg, cfg.methods[it.method_idx],
                             cfg.snr_db[it.snr_idx], it.trial, data)
                       .record;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

std::vector<AggregateRow> aggregate_records(const std::vector<SweepRecord>& records) {
  // preserve first-appearance order of (method, snr) cells
  std::vector<AggregateRow> rows;
  std::map<std::pair<std::string, double>, size_t> index;
  struct Acc {
    std::vector<double> rt, rs, nr, nc, ue, te, miss, fa;
  };
  std::vector<Acc> accs;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.method, r.snr_db);
    if (!index.count(key)) {
      index[key] = rows.size();
      AggregateRow row;
      row.method = r.method;
      row.snr_db = r.snr_db;
      rows.push_back(row);
      accs.emplace_back();
    }
    if (r.status != "ok") continue;
    Acc& a = accs[index[key]];
    a.rt.push_back(r.rmse_target);
    a.rs.push_back(r.rmse_scatterer);
    a.nr.push_back(r.nmse_radar);
    a.nc.push_back(r.nmse_comm);
    a.ue.push_back(r.user_pos_error);
    a.te.push_back(r.tau_offset_error);
    a.miss.push_back(r.miss_count);
    a.fa.push_back(r.false_alarm_count);
  }
  auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    se = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= v.size();
    if (v.size() < 2) return;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= (v.size() - 1);
    se = std::sqrt(var / v.size());
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    AggregateRow& row = rows[i];
    const Acc& a = accs[i];
    row.trials_ok = static_cast<int>(a.rt.size());
    mean_se(a.rt, row.mean_rmse_target, row.se_rmse_target);
    mean_se(a.rs, row.mean_rmse_scatterer, row.se_rmse_scatterer);
    mean_se(a.nr, row.mean_nmse_radar, row.se_nmse_radar);
    mean_se(a.nc, row.mean_nmse_comm, row.se_nmse_comm);
    double dummy;
    mean_se(a.ue, row.mean_user_pos_error, dummy);
    mean_se(a.te, row.mean_tau_offset_error, dummy);
    mean_se(a.miss, row.mean_miss, dummy);
    mean_se(a.fa, row.mean_false_alarm, dummy);
  }
  return rows;
}

std::string records_to_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << "method,snr_db,trial,status,rmse_target_m,rmse_scatterer_m,"
        "nmse_radar,nmse_comm,miss_count,false_alarm_count,"
        "user_pos_error_m,tau_offset_error_s,em_iters\n";
  for (const auto& r : records) {
    os << r.method << ',' << fmt(r.snr_db) << ',' << r.trial << ',' << r.status
       << ',' << fmt(r.rmse_target) << ',' << fmt(r.rmse_scatterer) << ','
       << fmt(r.nmse_radar) << ',' << fmt(r.nmse_comm) << ',' << r.miss_count
       << ',' << r.false_alarm_count << ',' << fmt(r.user_pos_error) << ','
       << fmt(r.tau_offset_error) << ',' << r.em_iters << '\n';
  }
  return os.str();
}

std::string aggregates_to_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "method,snr_db,trials_ok,mean_rmse_target_m,se_rmse_target_m,"
        "mean_rmse_scatterer_m,se_rmse_scatterer_m,mean_nmse_radar,"
        "se_nmse_radar,mean_nmse_comm,se_nmse_comm,mean_user_pos_error_m,"
        "mean_tau_offset_error_s,mean_miss_count,mean_false_alarm_count\n";
  for (const auto& r : rows) {
    os << r.method << ',' << fmt(r.snr_db) << ',' << r.trials_ok << ','
       << fmt(r.mean_rmse_target) << ',' << fmt(r.se_rmse_target) << ','
       << fmt(r.mean_rmse_scatterer) << ',' << fmt(r.se_rmse_scatterer) << ','
       << fmt(r.mean_nmse_radar) << ',' << fmt(r.se_nmse_radar) << ','
       << fmt(r.mean_nmse_comm) << ',' << fmt(r.se_nmse_comm) << ','
       << fmt(r.mean_user_pos_error) << ',' << fmt(r.mean_tau_offset_error)
       << ',' << fmt(r.mean_miss) << ',' << fmt(r.mean_false_alarm) << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_plot(const std::vector<Series>& series, const std::string& title,
                     const std::string& ylabel) {
  const int w = 640, h = 480, ml = 70, mr = 150, mt = 40, mb = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1;
    ymin -= 1;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  auto sy = [&](double y) {
    return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>"
     << title << "</text>\n";
  // axes
  os << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
     << "' y2='" << h - mb << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
     << h - mb << "' stroke='black'/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = xmin + k * (xmax - xmin) / 5;
    const double y = ymin + k * (ymax - ymin) / 5;
    os << "<text x='" << sx(x) << "' y='" << h - mb + 18
       << "' text-anchor='middle' font-size='11'>" << fmt(x) << "</text>\n";
    char ybuf[32];
    std::snprintf(ybuf, sizeof(ybuf), "%.3g", y);
    os << "<text x='" << ml - 6 << "' y='" << sy(y) + 4
       << "' text-anchor='end' font-size='11'>" << ybuf << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << sy(y) << "' x2='" << w - mr
       << "' y2='" << sy(y) << "' stroke='#dddddd'/>\n";
  }
  os << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
     << "' text-anchor='middle' font-size='13'>SNR (dB)</text>\n";
  os << "<text x='18' y='" << (mt + h - mb) / 2
     << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
     << (mt + h - mb) / 2 << ")'>" << ylabel << "</text>\n";

  int ci = 0;
  for (const auto& s : series) {
    const std::string color = colors[ci % 6];
    std::ostringstream pts;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      pts << sx(x) << ',' << sy(y) << ' ';
    }
    os << "<polyline fill='none' stroke='" << color
       << "' stroke-width='2' points='" << pts.str() << "'/>\n";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      os << "<circle cx='" << sx(x) << "' cy='" << sy(y) << "' r='3' fill='"
         << color << "'/>\n";
    }
    const int ly = mt + 20 * ci;
    os << "<line x1='" << w - mr + 10 << "' y1='" << ly << "' x2='"
       << w - mr + 34 << "' y2='" << ly << "' stroke='" << color
       << "' stroke-width='2'/>\n";
    os << "<text x='" << w - mr + 40 << "' y='" << ly + 4
       << "' font-size='12'>" << s.label << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<Series> collect_series(const std::vector<AggregateRow>& rows,
                                   double AggregateRow::* field, bool to_db) {
  std::vector<Series> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Series& s) { return s.label == r.method; });
    if (it == out.end()) {
      out.push_back({r.method, {}});
      it = out.end() - 1;
    }
    double v = r.*field;
    if (to_db) v = v > 0 ? 10.0 * std::log10(v) : std::numeric_limits<double>::quiet_NaN();
    it->points.emplace_back(r.snr_db, v);
  }
  for (auto& s : out) {
    std::sort(s.points.begin(), s.points.end());
  }
  return out;
}

}  // namespace

std::string rmse_svg(const std::vector<AggregateRow>& rows) {
  auto t = collect_series(rows, &AggregateRow::mean_rmse_target, false);
  auto s = collect_series(rows, &AggregateRow::mean_rmse_scatterer, false);
  for (auto& x : t) x.label += " (target)";
  for (auto& x : s) x.label += " (scatterer)";
  t.insert(t.end(), s.begin(), s.end());
  return svg_plot(t, "Localization RMSE vs SNR", "RMSE (m)");
}

std::string nmse_svg(const std::vector<AggregateRow>& rows) {
  auto r = collect_series(rows, &AggregateRow::mean_nmse_radar, true);
  auto c = collect_series(rows, &AggregateRow::mean_nmse_comm, true);
  for (auto& x : r) x.label += " (radar)";
  for (auto& x : c) x.label += " (comm)";
  r.insert(r.end(), c.begin(), c.end());
  return svg_plot(r, "Channel NMSE vs SNR", "NMSE (dB)");
}

std::string trial_report(const ExperimentConfig& cfg, const std::string& method,
                         double snr_db, int trial) {
  const auto data = make_trial(cfg, trial, snr_db);
  const auto out = run_trial(cfg, method, snr_db, trial, data);
  std::ostringstream os;
  os << "trial " << trial << "  method " << method << "  snr " << fmt(snr_db)
     << " dB  seed " << cfg.seed << "\n\n";
  os << "ground truth\n";
  os << "  user            (" << fmt(data.scene.user.x) << ", "
     << fmt(data.scene.user.y) << ")\n";
  os << "  time offset     " << fmt(data.scene.time_offset) << " s\n";
  os << "  targets         " << data.scene.targets.size() << "\n";
  for (const auto& t : data.scene.targets) {
    os << "    (" << fmt(t.pos.x) << ", " << fmt(t.pos.y) << ")  |gain| "
       << fmt(std::abs(t.gain)) << "\n";
  }
  os << "  scatterers      " << data.scene.scatterers.size() << "\n";
  for (const auto& s : data.scene.scatterers) {
    os << "    (" << fmt(s.pos.x) << ", " << fmt(s.pos.y) << ")  |gain| "
       << fmt(std::abs(s.gain)) << "\n";
  }
  os << "\nestimates (status: " << out.record.status << ")\n";
  os << "  user            (" << fmt(out.estimates.user_pos.x) << ", "
     << fmt(out.estimates.user_pos.y) << ")\n";
  os << "  time offset     " << fmt(out.estimates.time_offset) << " s\n";
  os << "  detected targets " << out.estimates.targets.size() << "\n";
  for (const auto& d : out.estimates.targets) {
    os << "    (" << fmt(d.pos.x) << ", " << fmt(d.pos.y) << ")  prob "
       << fmt(d.prob) << "  |gain| " << fmt(std::abs(d.gain)) << "\n";
  }
  os << "  detected scatterers " << out.estimates.scatterers.size() << "\n";
  for (const auto& d : out.estimates.scatterers) {
    os << "    (" << fmt(d.pos.x) << ", " << fmt(d.pos.y) << ")  prob "
       << fmt(d.prob) << "  |gain| " << fmt(std::abs(d.gain)) << "\n";
  }
  os << "\nmetrics\n";
  os << "  rmse target     " << fmt(out.record.rmse_target) << " m\n";
  os << "  rmse scatterer  " << fmt(out.record.rmse_scatterer) << " m\n";
  os << "  nmse radar      " << fmt(out.record.nmse_radar) << "\n";
  os << "  nmse comm       " << fmt(out.record.nmse_comm) << "\n";
  os << "  misses          " << out.record.miss_count << "\n";
  os << "  false alarms    " << out.record.false_alarm_count << "\n";
  os << "  user pos error  " << fmt(out.record.user_pos_error) << " m\n";
  os << "  tau error       " << fmt(out.record.tau_offset_error) << " s\n";
  os << "  em iterations   " << out.record.em_iters << "\n";
  return os.str();
}

}  // namespace isacsim
