#include "fks/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fks/analysis.hpp"
#include "fks/inequality.hpp"
#include "fks/integrator.hpp"
#include "fks/operators.hpp"
#include "fks/runner.hpp"

namespace fks {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Roundoff in the FFT lands in every mode and is amplified by |k|^alpha, so a
// low mode carries a floor of about eps (k_max / k_j)^alpha.  n = 64 keeps that
// ratio small enough to test every on-grid mode against 1e-12.
CheckResult multiplier_exactness() {
  CheckResult r;
  r.name = "fourier_multiplier_exactness";
  const std::size_t n = 64;
  const Grid g(n, 20.0);
  const auto k = g.wavenumbers();
  double worst = 0.0;
  for (double a : {0.5, 1.0, 1.5, 2.0}) {
    for (std::size_t j = 1; j < n / 2; ++j) {
      Field f(g);
      // k_j x_i = pi (2 i j - j n) / n, reduced exactly mod 2 pi
      for (std::size_t i = 0; i < n; ++i) {
        const auto m = static_cast<long>((2 * i * j + n * j) % (2 * n));
        f.values[i] = std::cos(kPi * static_cast<double>(m) / static_cast<double>(n));
      }
      const Field lf = frac_laplacian_spectral(f, FractionalExponent(a));
      const double sym = std::pow(k[j], a);
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(lf.values[i] - sym * f.values[i]));
      worst = std::max(worst, err / sym);
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = fmt("max relative error %.3g (bound 1e-12), alpha in {0.5,1,1.5,2}, modes j=1..%zu on n=%zu", worst,
                 n / 2 - 1, n);
  return r;
}

CheckResult operator_cross_validation() {
  CheckResult r;
  r.name = "operator_cross_validation";
  const Grid g(2048, 20.0);
  const Field f = synthesize_initial({Family::gaussian, 1.0, 1.0, 0.0}, g);
  double worst = 0.0, worst_c = 0.0;
  std::string per;
  for (double a : {0.3, 0.5, 0.8, 1.0, 1.5}) {
    const FractionalExponent e(a);
    const Field s = frac_laplacian_spectral(f, e);
    const Field q = frac_laplacian_quadrature(f, e, make_quadrature_scheme(g, e));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
      num += (s.values[i] - q.values[i]) * (s.values[i] - q.values[i]);
      den += s.values[i] * s.values[i];
    }
    const double rel = std::sqrt(num / den);
    const double c_rel = std::abs(fractional_constant(a) / fractional_constant_by_quadrature(a) - 1.0);
    worst = std::max(worst, rel);
    worst_c = std::max(worst_c, c_rel);
    per += fmt(" %.1f:%.2e", a, rel);
  }
  r.pass = worst <= 1e-3 && worst_c <= 1e-8;
  r.detail = fmt("max relative L2 gap %.3g (bound 1e-3); c_alpha vs quadrature %.2g (bound 1e-8);", worst, worst_c) +
             per;
  return r;
}

Field evolve(const Field& f0, double alpha, double chi, Frame frame, double horizon, StepControl control = {}) {
  SimState s{frame, 0.0, f0, FractionalExponent(alpha), chi};
  Observer obs;
  obs.interval = horizon;
  obs.keep_snapshots = false;
  const auto tr = advance(s, horizon, control, obs);
  if (tr.outcome != Outcome::completed) throw std::runtime_error("oracle run ended with " + std::string(to_string(tr.outcome)));
  return *tr.final_field;
}

CheckResult semigroup_oracles() {
  CheckResult r;
  r.name = "semigroup_oracles";
  double cauchy_err, gauss_err;
  {
    const Grid g(2048, 40.0);
    Field f0(g), exact(g);
    for (std::size_t i = 0; i < g.n(); ++i) {
      f0.values[i] = wrapped_cauchy(g.x(i), 1.0, 1.0, g.half_width());
      exact.values[i] = wrapped_cauchy(g.x(i), 2.0, 1.0, g.half_width());
    }
    cauchy_err = l1_distance(evolve(f0, 1.0, 0.0, Frame::physical, 1.0), exact);
  }
  {
    const Grid g(2048, 20.0);
    Field f0(g), exact(g);
    for (std::size_t i = 0; i < g.n(); ++i) {
      f0.values[i] = wrapped_gaussian(g.x(i), 1.0, 1.0, g.half_width());
      exact.values[i] = wrapped_gaussian(g.x(i), 3.0, 1.0, g.half_width());
    }
    gauss_err = l1_distance(evolve(f0, 2.0, 0.0, Frame::physical, 1.0), exact);
  }
  r.pass = cauchy_err <= 1e-3 && gauss_err <= 1e-4;
  r.detail = fmt("alpha=1 Cauchy(1)->Cauchy(2) L1 %.3g (bound 1e-3); alpha=2 N(0,1)->N(0,3) L1 %.3g (bound 1e-4)",
                 cauchy_err, gauss_err);
  return r;
}

CheckResult mass_conservation() {
  CheckResult r;
  r.name = "mass_conservation";
  const Grid g(256, 20.0);
  const Field f0 = synthesize_initial({Family::gaussian, 2.5, 1.0, 0.0}, g);
  SimState s{Frame::physical, 0.0, f0, FractionalExponent(1.0), 1.0};
  StepControl c;
  c.dt_max = 1e-4;
  Observer obs;
  obs.interval = 1.0;
  obs.keep_snapshots = false;
  const auto tr = advance(s, 10.0, c, obs);
  r.pass = tr.steps >= 100000 && tr.max_relative_mass_drift <= 1e-12;
  r.detail = fmt("max relative drift %.3g over %ld steps (bound 1e-12 over >= 1e5 steps)", tr.max_relative_mass_drift,
                 tr.steps);
  return r;
}

CheckResult ipp_suite() {
  CheckResult r;
  r.name = "integration_by_parts_suite";
  const double ps[] = {2.0, 3.0, 4.0};
  const double as[] = {0.5, 1.0, 1.5};
  const auto rep = run_ipp_suite(100, ps, as);
  r.pass = rep.checks == 900 && rep.violations == 0 && rep.worst_relative_margin >= -1e-10 &&
           rep.p2_max_relative_margin <= 1e-12;
  r.detail = fmt("%ld checks, %ld violations, worst margin/|lhs| %.3g (bound -1e-10), p=2 |margin|/|lhs| %.3g (bound 1e-12)",
                 rep.checks, rep.violations, rep.worst_relative_margin, rep.p2_max_relative_margin);
  return r;
}

RunResult run_preset(const std::string& name) {
  RunContext ctx;
  ctx.write_artifacts = false;
  return run(preset(name), ctx);
}

CheckResult small_mass_alpha1() {
  CheckResult r;
  r.name = "small_mass_alpha1_global";
  const RunResult res = run_preset("subcritical-alpha1");
  const auto& d = res.trajectory.diagnostics;
  double l2_rise = -std::numeric_limits<double>::infinity(), mass_dev = 0.0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    l2_rise = std::max(l2_rise, d[i].l2 - d[i - 1].l2);
    mass_dev = std::max(mass_dev, std::abs(d[i].mass - d[0].mass) / d[0].mass);
  }
  const double c21 = estimate_gns_constant(2.0, 1.0, TrialFamily{}, res.config.gns_budget, res.config.seed).C_hat;
  const auto decay = verify_lp_decay(res.trajectory, 2.0, 1.0, c21);
  const bool completed = res.trajectory.outcome == Outcome::completed && res.trajectory.final_time == 10.0;
  r.pass = completed && l2_rise <= 1e-10 && mass_dev <= 1e-12 && decay.violations == 0;
  r.detail = fmt("M=%.6g (0.5 x 4/C_hat(1,1)), outcome %s at t=%g; max L2 rise %.3g (bound 1e-10); L1 drift %.3g; "
                 "p=2 decay check %ld/%ld ok with C_hat(2,1)=%.6g, max excess %.3g",
                 res.config.initial.mass, std::string(to_string(res.trajectory.outcome)).c_str(),
                 res.trajectory.final_time, l2_rise, mass_dev, decay.checks - decay.violations, decay.checks, c21,
                 decay.max_excess);
  return r;
}

CheckResult rescaled_stationarity() {
  CheckResult r;
  r.name = "rescaled_frame_stationarity";
  const RunResult res = run_preset("subcritical-alpha1-rescaled");
  const auto& t = res.trajectory.times;
  const auto& snaps = res.trajectory.snapshots;
  double worst = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 4.0 - 1e-12) continue;
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (std::abs(t[j] - t[i] - 1.0) < 1e-9) {
        worst = std::max(worst, selfsimilar_residual(snaps[i], snaps[j]));
        ++pairs;
      }
    }
  }
  r.pass = res.trajectory.outcome == Outcome::completed && pairs > 0 && worst <= 1e-2;
  r.detail = fmt("max residual(tau, tau+1) for tau >= 4: %.3g over %d pairs (bound 1e-2), outcome %s", worst, pairs,
                 std::string(to_string(res.trajectory.outcome)).c_str());
  return r;
}

CheckResult cauchy_limit() {
  CheckResult r;
  r.name = "cauchy_limit";
  const RunResult res = run_preset("pure-diffusion-rescaled");
  const Field& u = *res.trajectory.final_field;
  const Grid& g = u.grid;
  const double M = res.config.initial.mass;
  const double L = g.half_width();
  double line = 0.0, wrapped = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double y = g.x(i);
    line += std::abs(u.values[i] - M / (kPi * (1.0 + y * y)));
    wrapped += std::abs(u.values[i] - wrapped_cauchy(y, 1.0, M, L));
  }
  line *= g.dx();
  wrapped *= g.dx();
  // The line density has mass outside the box that no box state can match.
  const double outside = M * (1.0 - 2.0 / kPi * std::atan(L));
  line = (line + outside) / M;
  wrapped /= M;
  r.pass = line <= 1e-2;
  r.known_limitation = true;
  r.detail = fmt("L1/M to M/(pi(1+y^2)) on the line %.4g (bound 1e-2; mass outside [-L,L] alone is %.4g); "
                 "to the periodized Cauchy density %.3g; tau=%g",
                 line, outside / M, wrapped, res.trajectory.final_time);
  return r;
}

CheckResult supercritical_alpha05() {
  CheckResult r;
  r.name = "supercritical_alpha05_blowup";
  const RunResult res = run_preset("supercritical-alpha05");
  double margin = 0.0;
  for (const auto& c : res.criteria) {
    if (c.criterion == "blowup") margin = c.margin;
  }
  const auto& d = res.trajectory.diagnostics;
  bool decreasing = d.size() >= 2;
  for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i].i_lambda < d[i - 1].i_lambda;
  const bool detected = res.trajectory.outcome == Outcome::blowup_detected;
  r.pass = margin >= 2.0 && detected && res.config.control.dt_min == 1e-7 && decreasing;
  r.detail = fmt("criterion margin %.3f (need >= 2); outcome %s at t=%.6g, last dt %.3g; I_lambda strictly "
                 "decreasing over %zu observations: %s",
                 margin, std::string(to_string(res.trajectory.outcome)).c_str(), res.trajectory.final_time,
                 res.trajectory.last_dt, d.size(), decreasing ? "yes" : "no");
  return r;
}

CheckResult large_mass_alpha1() {
  CheckResult r;
  r.name = "large_mass_alpha1_growth";
  const RunResult res = run_preset("supercritical-alpha1");
  const auto& d = res.trajectory.diagnostics;
  const auto o = res.trajectory.outcome;
  bool increasing = d.size() >= 10;
  for (std::size_t i = d.size() >= 10 ? d.size() - 9 : 1; i < d.size(); ++i) {
    increasing = increasing && d[i].l_inf > d[i - 1].l_inf;
  }
  r.pass = (o == Outcome::blowup_detected || o == Outcome::resolution_lost) && increasing;
  r.detail = fmt("M=%.6g (4 x 4/C_hat(1,1)); outcome %s at t=%.6g; L_inf strictly increasing over the last 10 of %zu "
                 "observations: %s",
                 res.config.initial.mass, std::string(to_string(o)).c_str(), res.trajectory.final_time, d.size(),
                 increasing ? "yes" : "no");
  return r;
}

CheckResult phase_sweep(const std::filesystem::path& scratch) {
  CheckResult r;
  r.name = "phase_sweep_consistency";
  SweepConfig s = default_phase_sweep();
  s.output_dir = (scratch / "sweep").string();
  std::filesystem::remove_all(s.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = sweep(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto a = audit_sweep(rows);
  r.pass = a.failed_cells == 0 && a.criterion_cells > 0 && a.criterion_cells_detected == a.criterion_cells &&
           a.monotonicity_violations <= 1 && secs <= 900.0;
  r.detail = fmt("%zu cells; criterion cells detected %ld/%ld; monotonicity exceptions %ld (allowed 1); failed %ld; "
                 "%.1f s (bound 900 s)",
                 rows.size(), a.criterion_cells_detected, a.criterion_cells, a.monotonicity_violations, a.failed_cells,
                 secs);
  return r;
}

}  // namespace

double fractional_constant_by_quadrature(double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  auto g = [alpha](double h) {
    // 1 - cos h = 2 sin^2(h/2) avoids cancellation near 0
    const double s = std::sin(0.5 * h);
    if (h < 1e-4) return 0.5 * std::pow(h, 1.0 - alpha) * (1.0 - h * h / 12.0);
    return 2.0 * s * s / std::pow(h, 1.0 + alpha);
  };
  // first period has the h^{1-alpha} endpoint singularity
  double total = boost::math::quadrature::tanh_sinh<double>().integrate(g, 0.0, 2.0 * kPi);
  const int periods = 4000;
  for (int k = 1; k < periods; ++k) {
    total += gauss_kronrod<double, 61>::integrate(g, 2.0 * kPi * k, 2.0 * kPi * (k + 1), 15, 1e-14);
  }
  // Tail: the cosine part averages out to O(H^{-1-alpha}); the constant part is exact.
  const double H = 2.0 * kPi * periods;
  total += std::pow(H, -alpha) / alpha;
  return 1.0 / (2.0 * total);
}

Suite parse_suite(std::string_view name) {
  if (name == "operators") return Suite::operators;
  if (name == "inequalities") return Suite::inequalities;
  if (name == "oracles") return Suite::oracles;
  if (name == "scenarios") return Suite::scenarios;
  if (name == "all") return Suite::all;
  throw std::invalid_argument("unknown suite '" + std::string(name) +
                              "' (operators, inequalities, oracles, scenarios, all)");
}

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::operators: return "operators";
    case Suite::inequalities: return "inequalities";
    case Suite::oracles: return "oracles";
    case Suite::scenarios: return "scenarios";
    case Suite::all: return "all";
  }
  return "?";
}

std::vector<AcceptanceCheck> acceptance_checks(const std::filesystem::path& scratch) {
  return {
      {"fourier_multiplier_exactness", Suite::operators, multiplier_exactness},
      {"operator_cross_validation", Suite::operators, operator_cross_validation},
      {"semigroup_oracles", Suite::oracles, semigroup_oracles},
      {"mass_conservation", Suite::scenarios, mass_conservation},
      {"integration_by_parts_suite", Suite::inequalities, ipp_suite},
      {"small_mass_alpha1_global", Suite::scenarios, small_mass_alpha1},
      {"rescaled_frame_stationarity", Suite::scenarios, rescaled_stationarity},
      {"cauchy_limit", Suite::oracles, cauchy_limit},
      {"supercritical_alpha05_blowup", Suite::scenarios, supercritical_alpha05},
      {"large_mass_alpha1_growth", Suite::scenarios, large_mass_alpha1},
      {"phase_sweep_consistency", Suite::scenarios, [scratch] { return phase_sweep(scratch); }},
  };
}

std::vector<CheckResult> run_suite(Suite suite, std::ostream& os, const std::filesystem::path& scratch) {
  std::vector<CheckResult> out;
  for (const auto& c : acceptance_checks(scratch)) {
    if (suite != Suite::all && c.suite != suite) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.name = c.name;
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail
       << (r.known_limitation && !r.pass ? " [known limitation]" : "") << fmt(" (%.1f s)", r.seconds) << '\n';
    os.flush();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace fks
