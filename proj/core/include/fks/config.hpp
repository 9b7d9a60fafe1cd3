#pragma once

// Run and sweep configuration, stored as JSON with a `schema_version` key.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fks/analysis.hpp"
#include "fks/integrator.hpp"
#include "fks/operators.hpp"
#include "fks/spectral.hpp"

namespace fks {

inline constexpr int kSchemaVersion = 1;

/// Invalid or unreadable configuration.  The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  std::size_t n = 2048;
  double half_width = 20.0;
};

struct RunConfig {
  std::string name;
  double alpha = 1.0;
  double chi = 1.0;
  Frame frame = Frame::physical;
  GridConfig grid;
  InitialProfile initial;
  StepControl control;
  double horizon = 1.0;
  double observation_interval = 0.1;
  /// Seed of the GNS constant search used by the criteria report.
  std::uint64_t seed = 1;
  std::string output_dir = "run";
  bool keep_snapshots = true;
  bool dealias = false;
  Confinement confinement = Confinement::characteristic;
  BlowupThresholds thresholds;
  /// Exponent of the test function for alpha < 1; 0 means 1 - alpha/2.
  double beta = 0.0;
  /// Trial budget per sub-family for the GNS estimate in the criteria report.
  long gns_budget = 300;

  /// Throws ConfigError naming the first violated precondition.  Also
  /// synthesizes the initial datum to check it fits the box.
  void validate() const;
  Grid make_grid() const;
  double effective_beta() const;
};

struct SweepConfig {
  RunConfig base;
  std::vector<double> alphas;
  std::vector<double> masses;
  std::vector<double> scales;
  int parallelism = 1;
  /// Give each cell a box of half-width base.grid.half_width * scale / base.initial.scale,
  /// so every cell sees the same resolution relative to its initial width.
  bool scale_grid_with_initial = true;
  std::string output_dir = "sweep";

  void validate() const;
  /// Config of one cell (output_dir left as in base).
  RunConfig cell(double alpha, double mass, double scale) const;
};

std::string to_json_string(const RunConfig& c);
std::string to_json_string(const SweepConfig& c);
RunConfig parse_run_config(std::string_view text);
SweepConfig parse_sweep_config(std::string_view text);

RunConfig load_run_config(const std::filesystem::path& path);
SweepConfig load_sweep_config(const std::filesystem::path& path);

std::string_view to_string(Frame f);
Frame parse_frame(std::string_view name);
std::string_view to_string(Confinement c);
Confinement parse_confinement(std::string_view name);

}  // namespace fks
