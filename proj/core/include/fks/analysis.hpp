#pragma once

// Quantities evaluated on discrete fields: the auxiliary test function of the
// blow-up argument and its omega bound, corrected moments, the global
// existence and blow-up criteria, blow-up detection and self-similar residuals.

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fks/integrator.hpp"
#include "fks/spectral.hpp"

namespace fks {

/// Closed form of phi.  phi(x) = |x| for |x| <= 1, |x|^{1-beta} for |x| >= 2.
/// On [1, 2] phi' = g2 + (1 - g2) q(x - 1) with g = d/dx x^{1-beta}, g2 = g(2) and
///   q(t) = (1 - a)(1 - S(t/tau)) [t < tau] + a (1 - t^2),
/// S the quintic smoothstep; a matches phi'' at 2 and tau matches phi(2).  The
/// result is C^2, concave and increasing on x > 0, hence sub-additive.
class PhiProfile {
 public:
  PhiProfile(double beta);

  double beta() const noexcept { return beta_; }
  double tau() const noexcept { return tau_; }

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

 private:
  double beta_;
  double gamma_;  // 1 - beta
  double g2_;
  double a_;
  double tau_;
};

struct TestFunction {
  double alpha = 0.0;
  double beta = 0.0;
  Grid grid;
  PhiProfile profile;
  std::vector<double> phi;
  std::vector<double> phi_prime;
  std::vector<double> omega;  // -Lambda^alpha phi at the grid nodes
  /// max over the grid of omega / (1 + |x|^{1-beta})
  double C_omega = 0.0;
  /// max over |y| >= 1 of |phi'(y) - sgn y| / phi(y)
  double C_remainder = 0.0;

  double omega_at(double x) const;
};

/// -Lambda^alpha phi at x by adaptive quadrature of the singular integral with
/// the power-law far tail added analytically.
double omega_value(const PhiProfile& phi, double alpha, double x);

double default_beta(double alpha);
/// Dedicated wide grid for the test function: [-128, 128) with 16384 points.
Grid default_test_grid();

/// Requires 0 < alpha < 1, 0 < beta < 1, alpha + beta > 1.
TestFunction build_test_function(double alpha, double beta, const Grid& grid);
TestFunction build_test_function(double alpha, double beta);

/// dx * sum phi(lambda x_i) / lambda * rho_i
double corrected_moment(const Field& rho, const TestFunction& tf, double lambda);

struct LambdaChoice {
  double lambda = 0.0;
  double mu = 0.0;
};

/// lambda = (2C/M)^{1/(1-alpha)}, mu = 2C.
LambdaChoice choose_lambda(double M, double alpha, double C);

/// Effective constants of the blow-up argument for mass M.  With
///   int omega_lambda rho <= C_omega lambda^{alpha-1} (2M + lambda I)
/// and the remainder of the drift term bounded by (M/2) C_remainder lambda I,
///   dI/dt <= -M^2/8 + B I,   C = 8 C_omega,   B = C_omega lambda^alpha + (C_remainder/2) M lambda.
/// I(0) < M^2/(8B) forces I to vanish in finite time; since I(0) <= int |x| rho0
/// this holds when (int |x| rho0)^{1-alpha} <= K2 M^{2-alpha} with
///   K2 = mu^{-alpha} (8 (C_omega + C_remainder mu / 2))^{-(1-alpha)}.
struct BlowupCriterion {
  double alpha = 0.0;
  double beta = 0.0;
  double mass = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double C = 0.0;
  double K2_effective = 0.0;
  double C_omega = 0.0;
  double C_remainder = 0.0;
  double B = 0.0;
};

BlowupCriterion make_blowup_criterion(const TestFunction& tf, double M);

struct CriterionReport {
  std::string criterion;
  bool satisfied = false;
  /// Global smallness: rhs - lhs.  Blow-up: rhs / lhs (satisfied iff >= 1).
  double margin = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> quantities;
};

/// ||rho0||_{1/alpha} < 4 alpha / C_hat.
CriterionReport check_global_smallness(const Field& rho0, double alpha, double C_hat);
/// (int |x| rho0)^{1-alpha} <= K2 M^{2-alpha}.  Throws if rho0 is not even.
CriterionReport check_blowup_criterion(const Field& rho0, double alpha, const BlowupCriterion& crit,
                                       const TestFunction& tf);

/// Header `criterion,quantity,value`.
void write_criteria_csv(std::ostream& os, std::span<const CriterionReport> reports);

struct BlowupThresholds {
  double growth = 1e4;
  double tail = 0.1;
};

/// blowup_detected if l_inf > growth * initial l_inf and tail_fraction > tail.
/// While a run is still going (final = false) nothing else is reported, so an
/// under-resolved spike keeps being refined; once the run stops (final = true)
/// the tail condition alone gives resolution_lost.
std::optional<Outcome> classify_blowup(const DiagnosticsRow& initial, const DiagnosticsRow& current, bool final,
                                       const BlowupThresholds& thr = {});
/// Final classification of a recorded table (first row = initial, last row = current).
std::optional<Outcome> detect_blowup(std::span<const DiagnosticsRow> rows, const BlowupThresholds& thr = {});

/// ||u1 - u2||_1 / mass(u1)
double selfsimilar_residual(const Field& u1, const Field& u2);

/// basic_diagnostics plus i_lambda (NaN when tf is null).
std::function<DiagnosticsRow(const SimState&)> make_diagnoser(std::shared_ptr<const TestFunction> tf, double lambda);

/// Header `time,mass,l2,l_inv_alpha,l_inf,first_moment,i_lambda,min_value,tail_fraction`.
void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows);
std::vector<DiagnosticsRow> read_diagnostics_csv(std::istream& is);

struct MomentAudit {
  bool strictly_decreasing = true;
  /// max over intervals of slope - (-M^2/8 + B I_mid); <= 0 when the bound holds
  double max_bound_excess = 0.0;
  std::size_t intervals = 0;
};

/// Finite-difference audit of the recorded i_lambda series.
MomentAudit audit_corrected_moment(std::span<const DiagnosticsRow> rows, const BlowupCriterion& crit);

}  // namespace fks
