#include "fks/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fks {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Holds the spectral state of one run so consecutive steps reuse the
// nonlinear term of the current state.
class Stepper {
 public:
  Stepper(const SimState& s, const DynamicsOptions& opts)
      : dyn_(s.field.grid, s.alpha, s.chi, s.frame, opts), n_(s.field.size()) {
    hat_.resize(n_);
    std::vector<cplx> in(s.field.values.begin(), s.field.values.end());
    fft_forward(in, hat_);
    n0_.resize(n_);
    star_.resize(n_);
    nstar_.resize(n_);
    next_.resize(n_);
    values_.resize(n_);
    scratch_.resize(n_);
    factor_.resize(n_);
    refresh();
  }

  struct Trial {
    bool finite = true;
    double error = 0.0;
  };

  Trial attempt(double dt) {
    set_factor(dt);
    for (std::size_t m = 0; m < n_; ++m) star_[m] = factor_[m] * (hat_[m] + dt * n0_[m]);
    dyn_.nonlinear(star_, nstar_, scratch_);
    Trial t;
    double diff = 0.0, norm = 0.0;
    for (std::size_t m = 0; m < n_; ++m) {
      next_[m] = factor_[m] * hat_[m] + 0.5 * dt * (factor_[m] * n0_[m] + nstar_[m]);
      diff += std::norm(next_[m] - star_[m]);
      norm += std::norm(next_[m]);
    }
    t.finite = std::isfinite(diff) && std::isfinite(norm);
    t.error = norm > 0.0 ? std::sqrt(diff / norm) : 0.0;
    return t;
  }

  void accept() {
    std::swap(hat_, next_);
    refresh();
  }

  double velocity() const noexcept { return vmax_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const cplx> spectrum() const noexcept { return hat_; }

 private:
  void refresh() { vmax_ = dyn_.nonlinear(hat_, n0_, values_); }

  void set_factor(double dt) {
    if (dt == factor_dt_) return;
    const auto sym = dyn_.symbol();
    for (std::size_t m = 0; m < n_; ++m) factor_[m] = std::exp(-sym[m] * dt);
    factor_dt_ = dt;
  }

  Dynamics dyn_;
  std::size_t n_;
  std::vector<cplx> hat_, n0_, star_, nstar_, next_;
  std::vector<double> values_, scratch_, factor_;
  double factor_dt_ = -1.0;
  double vmax_ = 0.0;
};

double tail_from_raw(const Grid& grid, std::span<const cplx> hat) {
  const double cutoff = 7.0 / 16.0 * static_cast<double>(grid.n());
  double total = 0.0, tail = 0.0;
  for (std::size_t m = 0; m < hat.size(); ++m) {
    const double e = std::norm(hat[m]);
    total += e;
    if (std::abs(static_cast<double>(grid.signed_index(m))) > cutoff) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

DiagnosticsRow cheap_row(double t, const Grid& grid, const Stepper& s) {
  DiagnosticsRow r;
  r.time = t;
  double sum = 0.0, mx = 0.0, mn = std::numeric_limits<double>::infinity();
  for (double v : s.values()) {
    sum += v;
    mx = std::max(mx, std::abs(v));
    mn = std::min(mn, v);
  }
  r.mass = grid.dx() * sum;
  r.l_inf = mx;
  r.min_value = mn;
  r.tail_fraction = tail_from_raw(grid, s.spectrum());
  r.l2 = r.l_inv_alpha = r.first_moment = r.i_lambda = kNaN;
  return r;
}

double clamp_dt(double v, double dx, const StepControl& c) {
  const double raw = c.safety * dx / std::max(v, 1e-12);
  return std::clamp(raw, c.dt_min, c.dt_max);
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::blowup_detected: return "blowup_detected";
    case Outcome::resolution_lost: return "resolution_lost";
    case Outcome::step_floor: return "step_floor";
    case Outcome::step_limit: return "step_limit";
  }
  return "unknown";
}

Outcome parse_outcome(std::string_view name) {
  for (auto o : {Outcome::completed, Outcome::blowup_detected, Outcome::resolution_lost, Outcome::step_floor,
                 Outcome::step_limit}) {
    if (to_string(o) == name) return o;
  }
  throw std::invalid_argument("unknown outcome '" + std::string(name) + "'");
}

void StepControl::validate() const {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("safety must lie in (0, 1]");
  if (!(dt_min > 0.0) || !(dt_min <= dt_max) || !std::isfinite(dt_max)) {
    throw std::invalid_argument("step control needs 0 < dt_min <= dt_max");
  }
  if (max_steps < 1) throw std::invalid_argument("max_steps must be positive");
}

DiagnosticsRow basic_diagnostics(const SimState& s) {
  const Field& f = s.field;
  DiagnosticsRow r;
  r.time = s.time;
  r.mass = mass(f);
  r.l2 = lp_norm(f, 2.0);
  r.l_inv_alpha = lp_norm(f, 1.0 / std::min(s.alpha.value(), 1.0));
  r.l_inf = max_abs(f);
  r.first_moment = first_moment(f);
  r.i_lambda = kNaN;
  r.min_value = min_value(f);
  r.tail_fraction = spectral_tail_fraction(f);
  return r;
}

double cfl_dt(const SimState& state, const StepControl& control) {
  const Dynamics dyn(state.field.grid, state.alpha, state.chi, state.frame);
  return clamp_dt(dyn.max_velocity(state.field), state.field.grid.dx(), control);
}

SimState step(const SimState& state, double dt, const DynamicsOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  Stepper s(state, opts);
  if (!s.attempt(dt).finite) throw std::runtime_error("non-finite values after step: resolution lost");
  s.accept();
  SimState out = state;
  out.time = state.time + dt;
  out.field.values.assign(s.values().begin(), s.values().end());
  return out;
}

Trajectory advance(const SimState& state, double horizon, const StepControl& control, const Observer& observer,
                   const DynamicsOptions& opts) {
  control.validate();
  if (!(horizon >= state.time)) throw std::invalid_argument("horizon lies before the current time");
  if (!(observer.interval > 0.0)) throw std::invalid_argument("observation interval must be positive");

  Trajectory traj;
  traj.final_time = state.time;
  if (horizon == state.time) {
    traj.final_field = state.field;
    return traj;
  }

  const Grid& grid = state.field.grid;
  const double dx = grid.dx();
  Stepper stepper(state, opts);
  SimState current = state;
  auto diagnose = observer.diagnose ? observer.diagnose : basic_diagnostics;

  const DiagnosticsRow initial_cheap = cheap_row(state.time, grid, stepper);
  const double m0 = initial_cheap.mass;

  auto observe = [&](double t) {
    current.time = t;
    current.field.values.assign(stepper.values().begin(), stepper.values().end());
    DiagnosticsRow row = diagnose(current);
    if (row.min_value < -1e-6 * row.l_inf && !traj.positivity_flag_time) traj.positivity_flag_time = t;
    traj.times.push_back(t);
    if (observer.keep_snapshots) traj.snapshots.push_back(current.field);
    traj.diagnostics.push_back(row);
    if (observer.on_observation) observer.on_observation(current, row);
  };

  double t = state.time;
  const double t0 = state.time;
  long obs_index = 1;
  auto obs_time = [&](long k) { return std::min(t0 + static_cast<double>(k) * observer.interval, horizon); };
  observe(t);
  bool last_observed = true;

  double dt_try = control.dt_max;
  while (t < horizon) {
    if (traj.steps >= control.max_steps) {
      traj.outcome = Outcome::step_limit;
      traj.message = "max_steps reached at t = " + format_number(t);
      break;
    }
    const double target = obs_time(obs_index);
    double dt = std::min(dt_try, clamp_dt(stepper.velocity(), dx, control));
    const bool hits = t + dt >= target - 1e-12 * std::max(1.0, std::abs(target));
    if (hits) dt = target - t;

    const auto trial = stepper.attempt(dt);
    const bool ok = trial.finite && (control.error_tolerance <= 0.0 || trial.error <= control.error_tolerance);
    if (!ok) {
      ++traj.rejected;
      if (dt <= control.dt_min * (1.0 + 1e-12)) {
        traj.outcome = trial.finite ? Outcome::step_floor : Outcome::resolution_lost;
        traj.message = std::string(trial.finite ? "step rejected at dt_min" : "non-finite values at dt_min") +
                       " (t = " + format_number(t) + ")";
        break;
      }
      dt_try = std::max(0.5 * dt, control.dt_min);
      continue;
    }

    stepper.accept();
    ++traj.steps;
    traj.last_dt = dt;
    t = hits ? target : t + dt;
    last_observed = false;
    if (control.error_tolerance > 0.0) {
      const double grow = trial.error > 0.0 ? 0.9 * std::sqrt(control.error_tolerance / trial.error) : 2.0;
      const double proposal = dt * std::clamp(grow, 0.5, 2.0);
      dt_try = hits ? std::max(dt_try, proposal) : proposal;
      dt_try = std::clamp(dt_try, control.dt_min, control.dt_max);
    } else {
      dt_try = control.dt_max;
    }

    const DiagnosticsRow row = cheap_row(t, grid, stepper);
    traj.max_relative_mass_drift = std::max(traj.max_relative_mass_drift, std::abs(row.mass - m0) / std::abs(m0));

    if (observer.monitor && traj.steps % std::max(1L, observer.monitor_every) == 0) {
      if (auto o = observer.monitor(initial_cheap, row, false)) {
        traj.outcome = *o;
        traj.message = std::string(to_string(*o)) + " at t = " + format_number(t);
        break;
      }
    }
    if (hits) {
      observe(t);
      last_observed = true;
      ++obs_index;
    }
  }

  if (observer.monitor && traj.outcome != Outcome::blowup_detected) {
    if (auto o = observer.monitor(initial_cheap, cheap_row(t, grid, stepper), true)) {
      if (traj.message.empty()) traj.message = std::string(to_string(*o)) + " at t = " + format_number(t);
      traj.outcome = *o;
    }
  }
  if (!last_observed) observe(t);
  traj.final_time = t;
  traj.final_field = current.field;
  return traj;
}

}  // namespace fks
