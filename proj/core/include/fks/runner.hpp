#pragma once

// Single runs, named presets and phase-diagram sweeps, with their on-disk
// artifacts: config.json, diagnostics.csv, snapshots/t_<time>.csv,
// criteria.csv and a key=value `summary` written last.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fks/analysis.hpp"
#include "fks/config.hpp"
#include "fks/integrator.hpp"

namespace fks {

/// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResolutionLost = 3;
inline constexpr int kExitVerification = 4;

int exit_code(Outcome o);

/// Precomputed pieces a sweep shares between cells.
struct RunContext {
  std::optional<double> C_hat;
  std::shared_ptr<const TestFunction> test_function;
  bool write_artifacts = true;
  std::ostream* log = nullptr;
};

struct RunResult {
  RunConfig config;
  Trajectory trajectory;
  std::vector<CriterionReport> criteria;
  /// GNS estimate C_hat(1/alpha, alpha) used by the global criterion (alpha <= 1).
  std::optional<double> C_hat;
  std::optional<BlowupCriterion> blowup;
  double initial_first_moment = 0.0;
  std::filesystem::path directory;
};

/// Validates, runs and (unless disabled) writes the artifacts to config.output_dir.
RunResult run(const RunConfig& config, const RunContext& ctx = {});

/// C_hat(1/alpha, alpha) over the default trial family.
double gns_constant_for(double alpha, std::uint64_t seed, long budget);
/// 4 / C_hat(1, 1): the effective mass threshold at alpha = 1.
double alpha1_mass_threshold(std::uint64_t seed = 1, long budget = 300);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(std::string_view name);

/// key=value lines, one per entry, sorted by key.
using Summary = std::map<std::string, std::string>;
Summary read_summary(const std::filesystem::path& file);

struct PhasePoint {
  double alpha = 0.0;
  double mass = 0.0;
  double scale = 0.0;
  double first_moment = 0.0;
  bool global_criterion = false;
  /// Only defined for alpha < 1.
  std::optional<bool> blowup_criterion;
  /// Empty when the cell failed; see note.
  std::optional<Outcome> outcome;
  /// Detection time, or the time the run stopped.
  double time = 0.0;
  std::string note;
};

/// Runs every (alpha, mass, scale) cell, `parallelism` at a time.  Cells whose
/// directory already holds a summary are read back instead of rerun.  Writes
/// <output_dir>/phase.csv and returns the rows in axis order.
std::vector<PhasePoint> sweep(const SweepConfig& config, std::ostream* log = nullptr);

/// Header `alpha,M,scale,first_moment,global_criterion,blowup_criterion,outcome,time,note`.
void write_phase_csv(std::ostream& os, std::span<const PhasePoint> rows);
std::string cell_directory_name(double alpha, double mass, double scale);

struct SweepAudit {
  long criterion_cells = 0;
  long criterion_cells_detected = 0;
  /// Blow-up cells with a smaller mass than some completed cell at the same (alpha, scale).
  long monotonicity_violations = 0;
  long failed_cells = 0;
};
SweepAudit audit_sweep(std::span<const PhasePoint> rows);

/// The 5x5 alpha = 0.5 sweep used by the acceptance suite.
SweepConfig default_phase_sweep();

}  // namespace fks
