// fks: command-line front end for runs, sweeps, verification and the
// inequality/test-function utilities.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fks/analysis.hpp"
#include "fks/config.hpp"
#include "fks/inequality.hpp"
#include "fks/runner.hpp"
#include "fks/verify.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& preset_name, const std::string& out_dir) {
  fks::RunConfig cfg = preset_name.empty() ? fks::load_run_config(config_path) : fks::preset(preset_name);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  fks::RunContext ctx;
  ctx.log = &std::cerr;
  const auto res = fks::run(cfg, ctx);
  for (const auto& c : res.criteria) {
    std::cout << c.criterion << ": " << (c.satisfied ? "satisfied" : "not satisfied")
              << " (margin " << fks::format_number(c.margin) << ")\n";
  }
  std::cout << "outcome=" << fks::to_string(res.trajectory.outcome) << " final_time="
            << fks::format_number(res.trajectory.final_time) << " dir=" << res.directory.string() << '\n';
  return fks::exit_code(res.trajectory.outcome);
}

int do_sweep(const std::string& config_path, const std::string& out_dir, int parallelism) {
  fks::SweepConfig cfg = config_path.empty() ? fks::default_phase_sweep() : fks::load_sweep_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (parallelism > 0) cfg.parallelism = parallelism;
  const auto rows = fks::sweep(cfg, &std::cerr);
  const auto audit = fks::audit_sweep(rows);
  std::cout << "cells=" << rows.size() << " failed=" << audit.failed_cells << " criterion_cells="
            << audit.criterion_cells << " detected=" << audit.criterion_cells_detected
            << " monotonicity_exceptions=" << audit.monotonicity_violations << '\n'
            << "phase table: " << (std::filesystem::path(cfg.output_dir) / "phase.csv").string() << '\n';
  return audit.failed_cells == 0 ? fks::kExitOk : 1;
}

int do_verify(const std::string& suite, const std::string& scratch) {
  const auto results = fks::run_suite(fks::parse_suite(suite), std::cout, scratch);
  long failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? fks::kExitOk : fks::kExitVerification;
}

int do_gns(double p, double alpha, int gaussians, int cauchys, long budget, std::uint64_t seed, const std::string& csv) {
  fks::TrialFamily fam;
  fam.gaussians = gaussians;
  fam.cauchys = cauchys;
  const auto est = fks::estimate_gns_constant(p, alpha, fam, budget, seed);
  if (csv.empty()) {
    fks::write_gns_csv(std::cout, std::span(&est, 1));
  } else {
    std::ofstream out(csv);
    fks::write_gns_csv(out, std::span(&est, 1));
  }
  std::cerr << "argmax: " << est.argmax_gaussians << " gaussian(s), " << est.argmax_cauchys << " cauchy bump(s);";
  for (double x : est.argmax_params) std::cerr << ' ' << fks::format_number(x);
  std::cerr << '\n';
  return fks::kExitOk;
}

int do_testfn(double alpha, double beta, const std::string& csv) {
  if (beta <= 0.0) beta = fks::default_beta(alpha);
  const auto tf = fks::build_test_function(alpha, beta);
  std::cout << "alpha=" << fks::format_number(alpha) << " beta=" << fks::format_number(beta)
            << " C_omega=" << fks::format_number(tf.C_omega) << " C_R=" << fks::format_number(tf.C_remainder)
            << " tau=" << fks::format_number(tf.profile.tau()) << '\n';
  if (!csv.empty()) {
    std::ofstream out(csv);
    out << "x,phi,phi_prime,omega\n";
    for (std::size_t i = 0; i < tf.grid.n(); ++i) {
      out << fks::format_number(tf.grid.x(i)) << ',' << fks::format_number(tf.phi[i]) << ','
          << fks::format_number(tf.phi_prime[i]) << ',' << fks::format_number(tf.omega[i]) << '\n';
    }
  }
  return fks::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional Keller-Segel solver and verification tools"};
  app.require_subcommand(1);

  std::string config, preset, out;
  auto* run = app.add_subcommand("run", "Run one simulation from a config file or a preset");
  auto* cfg_opt = run->add_option("--config", config, "JSON run config");
  auto* preset_opt = run->add_option("--preset", preset, "Preset name")->excludes(cfg_opt);
  cfg_opt->excludes(preset_opt);
  run->add_option("--out", out, "Override output directory");
  bool list_presets = false;
  run->add_flag("--list-presets", list_presets, "Print the preset names and exit");

  std::string sweep_config, sweep_out;
  int parallelism = 0;
  auto* sweep = app.add_subcommand("sweep", "Phase-diagram sweep (default: the 5x5 alpha=0.5 sweep)");
  sweep->add_option("--config", sweep_config, "JSON sweep config");
  sweep->add_option("--out", sweep_out, "Override output directory");
  sweep->add_option("--parallelism", parallelism, "Concurrent cells")->check(CLI::PositiveNumber);

  std::string suite = "all", scratch = "verify-scratch";
  auto* verify = app.add_subcommand("verify", "Run acceptance suites");
  verify->add_option("suite", suite, "operators | inequalities | oracles | scenarios | all");
  verify->add_option("--scratch", scratch, "Directory for sweep artifacts");

  double p = 2.0, alpha = 1.0, beta = 0.0;
  int gaussians = 2, cauchys = 0;
  long budget = 300;
  std::uint64_t seed = 1;
  std::string gns_csv;
  auto* gns = app.add_subcommand("gns", "Estimate the GNS constant C(p, alpha)");
  gns->add_option("--p", p, "Exponent p >= 1")->required();
  gns->add_option("--alpha", alpha, "alpha in (0, 1]")->required();
  gns->add_option("--gaussians", gaussians, "Gaussian bumps in the trial family");
  gns->add_option("--cauchys", cauchys, "Cauchy bumps in the trial family");
  gns->add_option("--budget", budget, "Evaluations per sub-family");
  gns->add_option("--seed", seed, "Search seed");
  gns->add_option("--csv", gns_csv, "Write the estimate to this file instead of stdout");

  std::string testfn_csv;
  double tf_alpha = 0.5;
  auto* testfn = app.add_subcommand("testfn", "Build the blow-up test function and report its constants");
  testfn->add_option("--alpha", tf_alpha, "alpha in (0, 1)")->required();
  testfn->add_option("--beta", beta, "beta (default 1 - alpha/2)");
  testfn->add_option("--csv", testfn_csv, "Write x,phi,phi_prime,omega to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fks::kExitConfig;
  }

  try {
    if (*run) {
      if (list_presets) {
        for (const auto& n : fks::preset_names()) std::cout << n << '\n';
        return fks::kExitOk;
      }
      if (config.empty() && preset.empty()) throw fks::ConfigError("run needs --config or --preset");
      return do_run(config, preset, out);
    }
    if (*sweep) return do_sweep(sweep_config, sweep_out, parallelism);
    if (*verify) return do_verify(suite, scratch);
    if (*gns) return do_gns(p, alpha, gaussians, cauchys, budget, seed, gns_csv);
    if (*testfn) return do_testfn(tf_alpha, beta, testfn_csv);
  } catch (const fks::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fks::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return fks::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
