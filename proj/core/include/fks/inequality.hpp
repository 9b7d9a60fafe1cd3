#pragma once

// Functional inequalities behind the global existence argument: the
// Gagliardo-Nirenberg-Sobolev ratio and its constant, the fractional
// integration-by-parts inequality, the L^p decay estimate along trajectories,
// and the alpha > 1 variant with its fitted constant.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fks/integrator.hpp"
#include "fks/spectral.hpp"

namespace fks {

/// int rho^{p+1} / (|rho^{p/2}|_{H^{alpha/2}}^2 ||rho||_{1/alpha})
double gns_ratio(const Field& rho, double p, double alpha);

/// Trial densities are mixtures of up to `gaussians` Gaussian and `cauchys`
/// Cauchy bumps.  Every sub-mixture (g <= gaussians, c <= cauchys) is searched
/// with its own deterministic stream and `budget` evaluations, so enlarging the
/// family only adds trials.  Per bump: log-scale, center and (after the first)
/// a logit weight, each clamped to the bounds below.
struct TrialFamily {
  int gaussians = 2;
  int cauchys = 0;
  double log_scale_min = -1.5;
  double log_scale_max = 1.0;
  double center_bound = 3.0;
  double logit_bound = 4.0;
};

/// Grid large enough for every member of the default family.
Grid default_gns_grid();

/// Density of unit mass for a parameter vector of the (g, c) sub-family.
Field trial_density(std::span<const double> params, int gaussians, int cauchys, const TrialFamily& family,
                    const Grid& grid);

struct GnsEstimate {
  double p = 0.0;
  double alpha = 0.0;
  double C_hat = 0.0;
  int argmax_gaussians = 0;
  int argmax_cauchys = 0;
  std::vector<double> argmax_params;
  long trials = 0;
  std::uint64_t seed = 0;
};

/// Multi-start Nelder-Mead maximization of gns_ratio over the family.  C_hat is
/// the largest ratio among all evaluated trials.
GnsEstimate estimate_gns_constant(double p, double alpha, const TrialFamily& family, long budget,
                                  std::uint64_t seed = 1, const Grid& grid = default_gns_grid());

/// Header `p,alpha,C_hat,trials,seed`.
void write_gns_csv(std::ostream& os, std::span<const GnsEstimate> rows);

struct IppResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

/// lhs = int rho^{p-1} Lambda^alpha rho, rhs = 4(p-1)/p^2 |rho^{p/2}|_{H^{alpha/2}}^2.
/// Requires rho > 0 pointwise and p > 1.
IppResult verify_ipp(const Field& rho, double p, double alpha);

/// exp of a random Fourier series with coefficients ~ N(0,1)/m^4 (m = 1..modes),
/// normalized to unit mass.
Field random_positive_field(const Grid& grid, std::mt19937_64& rng, int modes = 12, double amplitude = 1.5);

struct IppSuiteReport {
  long checks = 0;
  long violations = 0;
  /// min over checks of margin / |lhs|
  double worst_relative_margin = 0.0;
  /// max over p = 2 checks of |margin| / |lhs|
  double p2_max_relative_margin = 0.0;
};

IppSuiteReport run_ipp_suite(long fields, std::span<const double> ps, std::span<const double> alphas,
                             std::uint64_t seed = 7, const Grid& grid = Grid(1024, 16.0));

struct LpDecayReport {
  long checks = 0;
  long violations = 0;
  /// max of (d/dt (1/p)||rho||_p^p - bound - tolerance)
  double max_excess = 0.0;
  /// observations where the bracket multiplying int rho^{p+1} is positive
  long bracket_positive = 0;
  /// largest finite-difference value of d/dt (1/p)||rho||_p^p
  double max_lhs = 0.0;
};

/// Checks d/dt (1/p)||rho||_p^p <= (-4(p-1)/(p^2 C_hat ||rho||_{1/alpha}) + (p-1)/p) int rho^{p+1}
/// at interior observations by centered differences of the snapshot series; the
/// tolerance is the dt^2 truncation estimate from third differences.
LpDecayReport verify_lp_decay(const Trajectory& traj, double p, double alpha, double C_hat);

struct SupercriticalGns {
  double lhs = 0.0;
  double rhs_shape = 0.0;
  double fitted_constant = 0.0;
  double exponent_beta = 0.0;
};

/// int rho^{p+1} against |rho^{p/2}|_{H^{alpha/2}}^{2 beta} M^{1 + p(1-beta)},
/// beta = p/(p + alpha - 1), for 1 < alpha <= 2.  fitted_constant = lhs / rhs_shape.
SupercriticalGns gns_supercritical_check(const Field& rho, double p, double alpha);
/// Largest fitted constant over a corpus.
double fit_supercritical_constant(std::span<const Field> corpus, double p, double alpha);

}  // namespace fks
