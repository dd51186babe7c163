#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "isacsim/harness.hpp"
#include "validation.hpp"

namespace {

isacsim::ExperimentConfig resolve_config(const std::string& config_path,
                                         const std::string& preset,
                                         uint64_t seed, bool seed_set,
                                         const std::string& out_dir,
                                         const std::string& methods,
                                         int workers) {
  isacsim::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = isacsim::load_config(config_path);
  } else {
    cfg = isacsim::preset_by_name(preset);
  }
  if (seed_set) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!methods.empty()) {
    cfg.methods.clear();
    isacsim::apply_config_entry(cfg, "experiment", "methods", methods);
  }
  if (workers > 0) cfg.workers = workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint scattering-environment sensing and channel estimation simulator"};
  app.require_subcommand(1);

  std::string config_path, preset = "quick", out_dir, methods;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  app.add_option("--config", config_path, "INI config file; overrides the preset");
  app.add_option("--preset", preset, "base preset: quick|paper");
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--methods", methods, "comma-separated method list");
  app.add_option("--workers", workers, "trial worker threads");

  auto* sim = app.add_subcommand("simulate", "run one trial and print a full report");
  double sim_snr = 20.0;
  int sim_trial = 0;
  std::string sim_method = "joint";
  sim->add_option("--snr", sim_snr, "SNR in dB");
  sim->add_option("--trial", sim_trial, "trial index");
  sim->add_option("--method", sim_method, "omp|fixed_grid|separate|joint");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep, CSV output");
  bool sweep_svg = false;
  sweep->add_flag("--svg", sweep_svg, "also write SVG plots");

  auto* validate = app.add_subcommand(
      "validate", "run gradient, oracle and consistency checks");

  for (auto* sub : {sim, sweep, validate}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve_config(config_path, preset, seed, seed_set,
                                    out_dir, methods, workers);

    if (sim->parsed()) {
      const std::string report =
          isacsim::trial_report(cfg, sim_method, sim_snr, sim_trial);
      std::cout << report;
      if (!cfg.out_dir.empty() && !out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        isacsim::write_file(cfg.out_dir + "/report.txt", report);
      }
      return 0;
    }

    if (sweep->parsed()) {
      const auto records = isacsim::run_sweep(cfg);
      const auto aggregates = isacsim::aggregate_records(records);
      std::filesystem::create_directories(cfg.out_dir);
      isacsim::write_file(cfg.out_dir + "/records.csv",
                          isacsim::records_to_csv(records));
      isacsim::write_file(cfg.out_dir + "/aggregate.csv",
                          isacsim::aggregates_to_csv(aggregates));
      if (sweep_svg || cfg.svg) {
        isacsim::write_file(cfg.out_dir + "/rmse_vs_snr.svg",
                            isacsim::rmse_svg(aggregates));
        isacsim::write_file(cfg.out_dir + "/nmse_vs_snr.svg",
                            isacsim::nmse_svg(aggregates));
      }
      std::cout << "wrote " << records.size() << " records to " << cfg.out_dir
                << "/records.csv\n";
      std::cout << isacsim::aggregates_to_csv(aggregates);
      return 0;
    }

    if (validate->parsed()) {
      const auto checks = isacsim::run_validation_checks(cfg);
      bool all_ok = true;
      for (const auto& c : checks) {
        std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
        all_ok &= c.passed;
      }
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
