#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofdmsense/harness.hpp"
#include "ofdmsense/verify.hpp"

namespace {

int run_sweep_command(const std::string& config_path, const std::string& out_path,
                      const std::string& plot_path, bool seed_given, std::uint64_t seed,
                      int workers) {
  ofdmsense::SweepConfig sc = ofdmsense::load_sweep_config(config_path);
  if (seed_given) sc.seed = seed;
  std::vector<ofdmsense::MetricsRow> rows = ofdmsense::run_sweep(sc, workers);
  ofdmsense::emit_csv(rows, out_path);
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  if (!plot_path.empty()) {
    ofdmsense::emit_plot_script(rows, plot_path);
    std::cout << "wrote plot script to " << plot_path << "\n";
  }
  return 0;
}

int run_trial_command(int n_sub, int n_cp, int k, int nb, double ratio, double snr_db,
                      const std::string& mode_str, std::uint64_t seed) {
  const int m = static_cast<int>(std::lround(ratio * (n_sub + n_cp)));
  ofdmsense::OfdmConfig cfg(n_sub, n_cp, k, m, nb);
  ofdmsense::Mode mode = ofdmsense::parse_mode(mode_str);
  ofdmsense::TrialRecord tr = ofdmsense::run_trial(cfg, snr_db, mode, seed);
  std::cout << ofdmsense::trial_csv_line(tr) << "\n";
  return 0;
}

int run_verify_command(const std::string& suite) {
  std::vector<ofdmsense::PropertyOutcome> outcomes;
  if (suite == "spark")
    outcomes = ofdmsense::verify_spark_suite();
  else if (suite == "rank")
    outcomes = ofdmsense::verify_rank_suite();
  else if (suite == "projector")
    outcomes = ofdmsense::verify_projector_suite();
  else if (suite == "oracle")
    outcomes = ofdmsense::verify_oracle_suite();
  else
    outcomes = ofdmsense::verify_all_suites();

  int failures = 0;
  for (const auto& o : outcomes) {
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << o.name;
    if (!o.detail.empty()) std::cout << "  (" << o.detail << ")";
    std::cout << "\n";
    failures += o.passed ? 0 : 1;
  }
  std::cout << outcomes.size() - failures << "/" << outcomes.size() << " properties passed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-Nyquist OFDM active-subcarrier identification"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run a seeded Monte Carlo grid and write a metrics CSV");
  std::string config_path, out_path, plot_path;
  std::uint64_t sweep_seed = 0;
  int workers = 1;
  sweep->add_option("--config", config_path, "JSON sweep description")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "output CSV path")->required();
  sweep->add_option("--plot", plot_path, "also write a standalone plot script here");
  auto* seed_opt = sweep->add_option("--seed", sweep_seed, "override the seed from the config");
  sweep->add_option("--workers", workers, "worker threads (output is identical for any count)")
      ->check(CLI::PositiveNumber);

  auto* trial = app.add_subcommand("trial", "Run one seeded trial and print it as a CSV line");
  double snr_db = 0.0, ratio = 0.5;
  int k = 1, nb = 10, n_sub = 32, n_cp = 8;
  std::string mode_str;
  std::uint64_t trial_seed = 0;
  trial->add_option("--snr-db", snr_db, "SNR in dB; inf for noiseless")->required();
  trial->add_option("--k", k, "active subcarrier count")->required();
  trial->add_option("--nb", nb, "captured OFDM symbol count")->required();
  trial->add_option("--ratio", ratio, "compression ratio M/N")->required();
  trial->add_option("--mode", mode_str, "known | unknown")->required();
  trial->add_option("--seed", trial_seed, "trial seed")->required();
  trial->add_option("--nsub", n_sub, "subcarrier count");
  trial->add_option("--ncp", n_cp, "cyclic prefix length");

  auto* verify = app.add_subcommand("verify", "Run numerical property suites");
  std::string suite = "all";
  verify->add_option("--suite", suite, "spark | rank | projector | oracle | all")
      ->check(CLI::IsMember({"spark", "rank", "projector", "oracle", "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(sweep))
      return run_sweep_command(config_path, out_path, plot_path, !seed_opt->empty(), sweep_seed,
                               workers);
    if (app.got_subcommand(trial))
      return run_trial_command(n_sub, n_cp, k, nb, ratio, snr_db, mode_str, trial_seed);
    return run_verify_command(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
