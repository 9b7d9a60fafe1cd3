#pragma once

// Integrating-factor Heun time stepping with step rejection, observation
// cadence and stop conditions.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fks/operators.hpp"
#include "fks/spectral.hpp"

namespace fks {

enum class Outcome {
  completed,
  blowup_detected,
  resolution_lost,
  step_floor,
  step_limit,  // max_steps exhausted before the horizon
};

std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view name);

struct SimState {
  Frame frame = Frame::physical;
  double time = 0.0;
  Field field;
  FractionalExponent alpha{1.0};
  double chi = 1.0;
};

struct StepControl {
  double safety = 0.2;
  double dt_min = 1e-7;
  double dt_max = 1e-2;
  long max_steps = 10'000'000;
  /// Relative L2 size of (corrector - predictor) accepted per step; <= 0 disables rejection.
  double error_tolerance = 1e-3;

  void validate() const;
};

/// One row of the diagnostics table.  Columns without a value are NaN.
struct DiagnosticsRow {
  double time = 0.0;
  double mass = 0.0;
  double l2 = 0.0;
  double l_inv_alpha = 0.0;
  double l_inf = 0.0;
  double first_moment = 0.0;
  double i_lambda = 0.0;
  double min_value = 0.0;
  double tail_fraction = 0.0;
};

/// Everything except i_lambda (left NaN).
DiagnosticsRow basic_diagnostics(const SimState& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<DiagnosticsRow> diagnostics;
  Outcome outcome = Outcome::completed;
  std::string message;
  double final_time = 0.0;
  std::optional<Field> final_field;
  long steps = 0;
  long rejected = 0;
  double last_dt = 0.0;
  double max_relative_mass_drift = 0.0;
  /// Time of the first observation with min rho < -1e-6 max rho, if any.
  std::optional<double> positivity_flag_time;
};

/// What advance() records and when it stops early.
struct Observer {
  /// Cadence in frame time; observations at t0, t0 + interval, ..., horizon.
  double interval = 1.0;
  bool keep_snapshots = true;
  /// Row recorded at each observation (defaults to basic_diagnostics).
  std::function<DiagnosticsRow(const SimState&)> diagnose;
  /// Called on the cheap per-step row (time, mass, l_inf, min_value, tail_fraction
  /// set; other columns NaN) every `monitor_every` accepted steps with final = false,
  /// and once with final = true when the run stops for any other reason.  A
  /// returned outcome halts the run (or replaces the final outcome).
  std::function<std::optional<Outcome>(const DiagnosticsRow& initial, const DiagnosticsRow& current, bool final)>
      monitor;
  long monitor_every = 1;
  /// Invoked after each observation is recorded.
  std::function<void(const SimState&, const DiagnosticsRow&)> on_observation;
};

/// clamp(safety dx / max(|velocity|, eps), dt_min, dt_max).  The velocity is the
/// chemotactic drift, plus the confining -y in the rescaled frame.
double cfl_dt(const SimState& state, const StepControl& control);

/// One integrating-factor Heun step of size dt.  Throws std::runtime_error if the
/// result is not finite.
SimState step(const SimState& state, double dt, const DynamicsOptions& opts = {});

Trajectory advance(const SimState& state, double horizon, const StepControl& control, const Observer& observer,
                   const DynamicsOptions& opts = {});

}  // namespace fks
