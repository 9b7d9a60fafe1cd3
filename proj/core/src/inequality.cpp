#include "fks/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fks/operators.hpp"
#include "fks/simplex.hpp"

namespace fks {

namespace {

Field power(const Field& f, double e) {
  Field out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = e == 1.0 ? f.values[i] : std::pow(f.values[i], e);
  return out;
}

void require_nonnegative(const Field& f, const char* what) {
  for (double v : f.values) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " needs a nonnegative density");
  }
}

std::size_t param_count(int g, int c) { return 3 * static_cast<std::size_t>(g + c) - 1; }

// Layout is (log-scale, center) for the first bump, then (log-scale, center, logit) per bump.
std::size_t param_kind(std::size_t i) { return i < 2 ? i : (i - 2) % 3; }

std::vector<double> clamp_params(std::span<const double> x, const TrialFamily& f) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (param_kind(i)) {
      case 0: out[i] = std::clamp(out[i], f.log_scale_min, f.log_scale_max); break;
      case 1: out[i] = std::clamp(out[i], -f.center_bound, f.center_bound); break;
      default: out[i] = std::clamp(out[i], -f.logit_bound, f.logit_bound); break;
    }
  }
  return out;
}

}  // namespace

double gns_ratio(const Field& rho, double p, double alpha) {
  if (!(p >= 1.0)) throw std::invalid_argument("gns_ratio requires p >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("gns_ratio requires 0 < alpha <= 1");
  require_nonnegative(rho, "gns_ratio");
  const double num = lp_integral(rho, p + 1.0);
  const double den = hs_seminorm_squared(power(rho, 0.5 * p), 0.5 * alpha) * lp_norm(rho, 1.0 / alpha);
  if (!(den > 0.0)) throw std::invalid_argument("gns_ratio: zero denominator");
  return num / den;
}

Grid default_gns_grid() { return Grid(2048, 24.0); }

Field trial_density(std::span<const double> params, int gaussians, int cauchys, const TrialFamily& family,
                    const Grid& grid) {
  const int K = gaussians + cauchys;
  if (K < 1 || gaussians < 0 || cauchys < 0) throw std::invalid_argument("trial family needs at least one bump");
  if (params.size() != param_count(gaussians, cauchys)) throw std::invalid_argument("wrong trial parameter count");
  std::vector<double> scale(K), center(K), weight(K);
  std::size_t j = 0;
  double wsum = 0.0;
  for (int b = 0; b < K; ++b) {
    scale[b] = std::exp(std::clamp(params[j++], family.log_scale_min, family.log_scale_max));
    center[b] = std::clamp(params[j++], -family.center_bound, family.center_bound);
    const double z = b == 0 ? 0.0 : std::clamp(params[j++], -family.logit_bound, family.logit_bound);
    weight[b] = std::exp(z);
    wsum += weight[b];
  }
  const double L = grid.half_width();
  Field f(grid);
  for (int b = 0; b < K; ++b) {
    const double w = weight[b] / wsum;
    const double s = scale[b], c = center[b];
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double y = grid.x(i) - c;
      if (b < gaussians) {
        f.values[i] += w * std::exp(-0.5 * y * y / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
      } else {
        f.values[i] += w * wrapped_cauchy(y, s, 1.0, L);
      }
    }
  }
  const double m = mass(f);
  for (double& v : f.values) v /= m;
  return f;
}

GnsEstimate estimate_gns_constant(double p, double alpha, const TrialFamily& family, long budget,
                                  std::uint64_t seed, const Grid& grid) {
  if (budget < 1) throw std::invalid_argument("GNS search budget must be >= 1");
  if (family.gaussians < 0 || family.cauchys < 0 || family.gaussians + family.cauchys < 1) {
    throw std::invalid_argument("trial family is empty");
  }
  GnsEstimate est;
  est.p = p;
  est.alpha = alpha;
  est.seed = seed;
  est.C_hat = -std::numeric_limits<double>::infinity();

  for (int g = 0; g <= family.gaussians; ++g) {
    for (int c = 0; c <= family.cauchys; ++c) {
      if (g + c == 0) continue;
      const std::size_t d = param_count(g, c);
      std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(g), static_cast<std::uint32_t>(c)};
      std::mt19937_64 rng(sseq);
      std::uniform_real_distribution<double> unit(0.0, 1.0);

      auto objective = [&](std::span<const double> x) {
        ++est.trials;
        double r;
        try {
          r = gns_ratio(trial_density(x, g, c, family, grid), p, alpha);
        } catch (const std::invalid_argument&) {
          return std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
        if (r > est.C_hat) {
          est.C_hat = r;
          est.argmax_gaussians = g;
          est.argmax_cauchys = c;
          est.argmax_params = clamp_params(x, family);
        }
        return -r;
      };

      // Canonical start: unit scales, centers spaced by one, equal weights.
      std::vector<double> start;
      const int K = g + c;
      for (int b = 0; b < K; ++b) {
        start.push_back(0.0);
        start.push_back(static_cast<double>(b) - 0.5 * (K - 1));
        if (b > 0) start.push_back(0.0);
      }
      long left = budget;
      while (left > 0) {
        SimplexOptions opts;
        opts.max_evaluations = left;
        opts.initial_step = 0.4;
        const auto res = nelder_mead(objective, start, opts);
        left -= res.evaluations;
        // random restart inside the bounds
        for (std::size_t i = 0; i < d; ++i) {
          const std::size_t kind = param_kind(i);
          if (kind == 0) {
            start[i] = family.log_scale_min + (family.log_scale_max - family.log_scale_min) * unit(rng);
          } else if (kind == 1) {
            start[i] = family.center_bound * (2.0 * unit(rng) - 1.0);
          } else {
            start[i] = family.logit_bound * (2.0 * unit(rng) - 1.0);
          }
        }
      }
    }
  }
  if (!std::isfinite(est.C_hat)) throw std::runtime_error("every GNS trial was rejected");
  return est;
}

void write_gns_csv(std::ostream& os, std::span<const GnsEstimate> rows) {
  os << "p,alpha,C_hat,trials,seed\n";
  for (const auto& r : rows) {
    os << format_number(r.p) << ',' << format_number(r.alpha) << ',' << format_number(r.C_hat) << ',' << r.trials
       << ',' << r.seed << '\n';
  }
}

IppResult verify_ipp(const Field& rho, double p, double alpha) {
  if (!(p > 1.0)) throw std::invalid_argument("verify_ipp requires p > 1");
  for (double v : rho.values) {
    if (!(v > 0.0)) throw std::invalid_argument("verify_ipp needs a strictly positive density");
  }
  const FractionalExponent a(alpha);
  const Field lap = frac_laplacian_spectral(rho, a);
  IppResult r;
  r.lhs = inner(power(rho, p - 1.0), lap);
  r.rhs = 4.0 * (p - 1.0) / (p * p) * hs_seminorm_squared(power(rho, 0.5 * p), 0.5 * alpha);
  r.margin = r.lhs - r.rhs;
  return r;
}

Field random_positive_field(const Grid& grid, std::mt19937_64& rng, int modes, double amplitude) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(modes + 1), b(modes + 1);
  for (int m = 1; m <= modes; ++m) {
    const double decay = amplitude / std::pow(static_cast<double>(m), 4.0);
    a[m] = decay * normal(rng);
    b[m] = decay * normal(rng);
  }
  Field f(grid);
  const double w = std::numbers::pi / grid.half_width();
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double x = grid.x(i);
    double s = 0.0;
    for (int m = 1; m <= modes; ++m) s += a[m] * std::cos(m * w * x) + b[m] * std::sin(m * w * x);
    f.values[i] = std::exp(s);
  }
  const double mtot = mass(f);
  for (double& v : f.values) v /= mtot;
  return f;
}

IppSuiteReport run_ipp_suite(long fields, std::span<const double> ps, std::span<const double> alphas,
                             std::uint64_t seed, const Grid& grid) {
  IppSuiteReport rep;
  rep.worst_relative_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (long k = 0; k < fields; ++k) {
    const Field rho = random_positive_field(grid, rng);
    for (double a : alphas) {
      for (double p : ps) {
        const auto r = verify_ipp(rho, p, a);
        ++rep.checks;
        const double rel = r.margin / std::abs(r.lhs);
        if (r.margin < -1e-10 * std::abs(r.lhs)) ++rep.violations;
        rep.worst_relative_margin = std::min(rep.worst_relative_margin, rel);
        if (p == 2.0) rep.p2_max_relative_margin = std::max(rep.p2_max_relative_margin, std::abs(rel));
      }
    }
  }
  return rep;
}

LpDecayReport verify_lp_decay(const Trajectory& traj, double p, double alpha, double C_hat) {
  const std::size_t n = traj.snapshots.size();
  if (n < 3 || traj.times.size() != n) throw std::invalid_argument("verify_lp_decay needs at least three snapshots");
  if (!(p > 1.0)) throw std::invalid_argument("verify_lp_decay requires p > 1");
  std::vector<double> Y(n), prod(n), norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    Y[i] = lp_integral(traj.snapshots[i], p) / p;
    prod[i] = lp_integral(traj.snapshots[i], p + 1.0);
    norm[i] = lp_norm(traj.snapshots[i], 1.0 / alpha);
  }
  const auto& t = traj.times;
  LpDecayReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  rep.max_lhs = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h = t[i + 1] - t[i - 1];
    const double lhs = (Y[i + 1] - Y[i - 1]) / h;
    const double bracket = -4.0 * (p - 1.0) / (p * p * C_hat * norm[i]) + (p - 1.0) / p;
    const double bound = bracket * prod[i];
    // Third differences from whichever side has room.
    double third = 0.0;
    if (i + 2 < n) third = std::max(third, std::abs(Y[i + 2] - 3.0 * Y[i + 1] + 3.0 * Y[i] - Y[i - 1]));
    if (i >= 2) third = std::max(third, std::abs(Y[i + 1] - 3.0 * Y[i] + 3.0 * Y[i - 1] - Y[i - 2]));
    const double step = 0.5 * h;
    const double tol = 2.0 * third / (6.0 * step) + 1e-12 * (std::abs(lhs) + std::abs(bound));
    const double excess = lhs - bound - tol;
    ++rep.checks;
    if (excess > 0.0) ++rep.violations;
    if (bracket > 0.0) ++rep.bracket_positive;
    rep.max_excess = std::max(rep.max_excess, excess);
    rep.max_lhs = std::max(rep.max_lhs, lhs);
  }
  return rep;
}

SupercriticalGns gns_supercritical_check(const Field& rho, double p, double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("supercritical GNS check requires 1 < alpha <= 2");
  if (!(p >= 1.0)) throw std::invalid_argument("supercritical GNS check requires p >= 1");
  require_nonnegative(rho, "gns_supercritical_check");
  SupercriticalGns r;
  r.exponent_beta = p / (p + alpha - 1.0);
  r.lhs = lp_integral(rho, p + 1.0);
  const double semi2 = hs_seminorm_squared(power(rho, 0.5 * p), 0.5 * alpha);
  r.rhs_shape = std::pow(semi2, r.exponent_beta) * std::pow(mass(rho), 1.0 + p * (1.0 - r.exponent_beta));
  if (!(r.rhs_shape > 0.0)) throw std::invalid_argument("supercritical GNS check: zero right-hand side");
  r.fitted_constant = r.lhs / r.rhs_shape;
  return r;
}

double fit_supercritical_constant(std::span<const Field> corpus, double p, double alpha) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  double best = 0.0;
  for (const auto& f : corpus) best = std::max(best, gns_supercritical_check(f, p, alpha).fitted_constant);
  return best;
}

}  // namespace fks
