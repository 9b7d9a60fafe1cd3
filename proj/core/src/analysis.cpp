#include "fks/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fks {

double corrected_moment(const Field& rho, const TestFunction& tf, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("corrected_moment requires lambda > 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) acc += tf.profile.value(lambda * rho.grid.x(i)) * rho.values[i];
  return rho.grid.dx() * acc / lambda;
}

LambdaChoice choose_lambda(double M, double alpha, double C) {
  if (!(M > 0.0)) throw std::invalid_argument("choose_lambda requires M > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("choose_lambda requires 0 < alpha < 1");
  if (!(C > 0.0)) throw std::invalid_argument("choose_lambda requires C > 0");
  return {std::pow(2.0 * C / M, 1.0 / (1.0 - alpha)), 2.0 * C};
}

BlowupCriterion make_blowup_criterion(const TestFunction& tf, double M) {
  BlowupCriterion c;
  c.alpha = tf.alpha;
  c.beta = tf.beta;
  c.mass = M;
  c.C_omega = tf.C_omega;
  c.C_remainder = tf.C_remainder;
  c.C = 8.0 * tf.C_omega;
  const auto lm = choose_lambda(M, tf.alpha, c.C);
  c.lambda = lm.lambda;
  c.mu = lm.mu;
  const double a = tf.alpha;
  c.B = c.C_omega * std::pow(c.lambda, a) + 0.5 * c.C_remainder * M * c.lambda;
  c.K2_effective = std::pow(c.mu, -a) * std::pow(8.0 * (c.C_omega + 0.5 * c.C_remainder * c.mu), -(1.0 - a));
  return c;
}

CriterionReport check_global_smallness(const Field& rho0, double alpha, double C_hat) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("global smallness requires 0 < alpha <= 1");
  if (!(C_hat > 0.0)) throw std::invalid_argument("GNS constant estimate must be positive");
  CriterionReport r;
  r.criterion = "global_smallness";
  r.lhs = lp_norm(rho0, 1.0 / alpha);
  r.rhs = 4.0 * alpha / C_hat;
  r.margin = r.rhs - r.lhs;
  r.satisfied = r.margin > 0.0;
  r.quantities = {{"alpha", alpha}, {"C_hat", C_hat}, {"norm_inv_alpha", r.lhs}, {"threshold", r.rhs},
                  {"margin", r.margin}, {"satisfied", r.satisfied ? 1.0 : 0.0}};
  return r;
}

CriterionReport check_blowup_criterion(const Field& rho0, double alpha, const BlowupCriterion& crit,
                                       const TestFunction& tf) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("blow-up criterion requires 0 < alpha < 1");
  if (alpha != crit.alpha) throw std::invalid_argument("blow-up criterion was built for another alpha");
  const std::size_t n = rho0.size();
  const double peak = max_abs(rho0);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(rho0.values[i] - rho0.values[n - i]) > 1e-10 * peak) {
      throw std::invalid_argument("blow-up criterion needs an even initial density (rho0(-x) = rho0(x))");
    }
  }
  const double M = mass(rho0);
  if (std::abs(M - crit.mass) > 1e-8 * M) throw std::invalid_argument("blow-up criterion was built for another mass");

  CriterionReport r;
  r.criterion = "blowup";
  const double m1 = first_moment(rho0);
  r.lhs = std::pow(m1, 1.0 - alpha);
  r.rhs = crit.K2_effective * std::pow(M, 2.0 - alpha);
  r.margin = r.rhs / r.lhs;
  r.satisfied = r.lhs <= r.rhs;
  const double I0 = corrected_moment(rho0, tf, crit.lambda);
  const double sharp = M * M / (8.0 * crit.B);
  r.quantities = {{"alpha", alpha},
                  {"beta", crit.beta},
                  {"mass", M},
                  {"first_moment", m1},
                  {"lambda", crit.lambda},
                  {"mu", crit.mu},
                  {"C", crit.C},
                  {"C_omega", crit.C_omega},
                  {"C_remainder", crit.C_remainder},
                  {"B", crit.B},
                  {"K2_effective", crit.K2_effective},
                  {"lhs", r.lhs},
                  {"rhs", r.rhs},
                  {"margin", r.margin},
                  {"satisfied", r.satisfied ? 1.0 : 0.0},
                  {"i_lambda_0", I0},
                  {"i_lambda_threshold", sharp},
                  {"sharp_satisfied", I0 < sharp ? 1.0 : 0.0}};
  return r;
}

void write_criteria_csv(std::ostream& os, std::span<const CriterionReport> reports) {
  os << "criterion,quantity,value\n";
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.quantities) os << r.criterion << ',' << k << ',' << format_number(v) << '\n';
  }
}

std::optional<Outcome> classify_blowup(const DiagnosticsRow& initial, const DiagnosticsRow& current, bool final,
                                       const BlowupThresholds& thr) {
  const bool grown = current.l_inf > thr.growth * initial.l_inf;
  const bool tail = current.tail_fraction > thr.tail;
  if (grown && tail) return Outcome::blowup_detected;
  if (tail && final) return Outcome::resolution_lost;
  return std::nullopt;
}

std::optional<Outcome> detect_blowup(std::span<const DiagnosticsRow> rows, const BlowupThresholds& thr) {
  if (rows.empty()) throw std::invalid_argument("detect_blowup needs at least one diagnostics row");
  return classify_blowup(rows.front(), rows.back(), true, thr);
}

double selfsimilar_residual(const Field& u1, const Field& u2) {
  require_same_grid(u1.grid, u2.grid, "selfsimilar_residual");
  return l1_distance(u1, u2) / mass(u1);
}

std::function<DiagnosticsRow(const SimState&)> make_diagnoser(std::shared_ptr<const TestFunction> tf, double lambda) {
  return [tf = std::move(tf), lambda](const SimState& s) {
    DiagnosticsRow r = basic_diagnostics(s);
    if (tf) r.i_lambda = corrected_moment(s.field, *tf, lambda);
    return r;
  };
}

namespace {
constexpr const char* kDiagHeader = "time,mass,l2,l_inv_alpha,l_inf,first_moment,i_lambda,min_value,tail_fraction";
}

void write_diagnostics_csv(std::ostream& os, std::span<const DiagnosticsRow> rows) {
  os << kDiagHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.time) << ',' << format_number(r.mass) << ',' << format_number(r.l2) << ','
       << format_number(r.l_inv_alpha) << ',' << format_number(r.l_inf) << ',' << format_number(r.first_moment) << ','
       << format_number(r.i_lambda) << ',' << format_number(r.min_value) << ',' << format_number(r.tail_fraction)
       << '\n';
  }
}

std::vector<DiagnosticsRow> read_diagnostics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kDiagHeader) {
    throw std::invalid_argument("diagnostics CSV header mismatch");
  }
  std::vector<DiagnosticsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double v[9];
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("short diagnostics row: " + line);
      x = std::strtod(cell.c_str(), nullptr);
    }
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return rows;
}

MomentAudit audit_corrected_moment(std::span<const DiagnosticsRow> rows, const BlowupCriterion& crit) {
  MomentAudit a;
  a.max_bound_excess = -std::numeric_limits<double>::infinity();
  const double M2 = crit.mass * crit.mass;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double dt = rows[i].time - rows[i - 1].time;
    if (!(dt > 0.0)) continue;
    const double dI = rows[i].i_lambda - rows[i - 1].i_lambda;
    if (!(dI < 0.0)) a.strictly_decreasing = false;
    // The bound is increasing in I, so its value at the start of a decreasing
    // interval dominates the interval average.
    const double bound = -M2 / 8.0 + crit.B * std::max(rows[i].i_lambda, rows[i - 1].i_lambda);
    a.max_bound_excess = std::max(a.max_bound_excess, dI / dt - bound);
    ++a.intervals;
  }
  if (a.intervals == 0) a.max_bound_excess = 0.0;
  return a;
}

}  // namespace fks
