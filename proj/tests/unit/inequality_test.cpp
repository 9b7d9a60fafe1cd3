#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fks/inequality.hpp"
#include "fks/integrator.hpp"
#include "helpers.hpp"

using namespace fks;
using fks::test::gaussian;

TEST_CASE("GNS ratio of a Gaussian against closed forms") {
  // Wide box: the periodic |k| sum converges to the line integral like (pi/L)^2.
  const auto g = make_grid(8192, 96.0);
  const auto rho = gaussian(g, 1.0, 1.0);
  CHECK(gns_ratio(rho, 1.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(2e-4));
  CHECK(gns_ratio(rho, 2.0, 1.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(2e-4));
}

TEST_CASE("GNS ratio invariances") {
  const auto g = make_grid(4096, 48.0);
  for (double alpha : {0.5, 0.8, 1.0}) {
    const double p = 1.0 / alpha;
    CAPTURE(alpha);
    const auto base = gaussian(g, 1.0, 1.0);
    const double r = gns_ratio(base, p, alpha);
    CHECK(gns_ratio(gaussian(g, 7.0, 1.0), p, alpha) == doctest::Approx(r).epsilon(1e-12));
    // dilating the profile together with the box samples the same values
    CHECK(gns_ratio(gaussian(make_grid(4096, 96.0), 1.0, 2.0), p, alpha) == doctest::Approx(r).epsilon(1e-12));
    CHECK(gns_ratio(gaussian(make_grid(4096, 24.0), 1.0, 0.5), p, alpha) == doctest::Approx(r).epsilon(1e-12));

    Field shifted(g);
    for (std::size_t i = 0; i < g.n(); ++i) shifted[(i + 301) % g.n()] = base[i];
    CHECK(gns_ratio(shifted, p, alpha) == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("trial densities") {
  const TrialFamily fam;
  const auto g = default_gns_grid();
  const std::vector<double> params{0.3, -1.0, 0.5, 1.2, 2.0};
  const auto rho = trial_density(params, 2, 0, fam, g);
  CHECK(mass(rho) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_value(rho) >= 0.0);

  const std::vector<double> one{0.0, 0.0};
  const auto unit = trial_density(one, 1, 0, fam, g);
  CHECK(fks::test::max_diff(unit, gaussian(g, 1.0, 1.0)) < 1e-12);
}

TEST_CASE("GNS constant search") {
  TrialFamily one;
  one.gaussians = 1;
  const auto single = estimate_gns_constant(1.0, 1.0, one, 1);
  CHECK(single.trials == 1);
  CHECK(single.C_hat == doctest::Approx(gns_ratio(gaussian(default_gns_grid(), 1.0, 1.0), 1.0, 1.0)).epsilon(1e-14));

  const auto small = estimate_gns_constant(1.0, 1.0, one, 60, 3);
  TrialFamily two;
  two.gaussians = 2;
  const auto big = estimate_gns_constant(1.0, 1.0, two, 60, 3);
  CHECK(small.C_hat >= single.C_hat);
  CHECK(big.C_hat >= small.C_hat);
  CHECK(big.trials > small.trials);

  const auto again = estimate_gns_constant(1.0, 1.0, two, 60, 3);
  CHECK(again.C_hat == big.C_hat);
  CHECK(again.argmax_params == big.argmax_params);

  // the reported argmax reproduces C_hat
  const auto rho = trial_density(big.argmax_params, big.argmax_gaussians, big.argmax_cauchys, two, default_gns_grid());
  CHECK(gns_ratio(rho, 1.0, 1.0) == doctest::Approx(big.C_hat).epsilon(1e-12));

  std::ostringstream os;
  const GnsEstimate rows[] = {big};
  write_gns_csv(os, rows);
  CHECK(os.str().rfind("p,alpha,C_hat,trials,seed\n", 0) == 0);

  CHECK_THROWS_AS(estimate_gns_constant(1.0, 1.0, one, 0), std::invalid_argument);
  TrialFamily none;
  none.gaussians = 0;
  CHECK_THROWS_AS(estimate_gns_constant(1.0, 1.0, none, 10), std::invalid_argument);
}

TEST_CASE("integration by parts inequality") {
  const auto g = make_grid(512, 12.0);
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    const auto rho = random_positive_field(g, rng);
    CHECK(mass(rho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_value(rho) > 0.0);
    for (double alpha : {0.3, 0.7, 1.0, 1.6}) {
      // p = 2 is an identity: both sides are |rho|_{H^{alpha/2}}^2
      const auto eq = verify_ipp(rho, 2.0, alpha);
      CHECK(eq.margin == doctest::Approx(0.0).scale(std::abs(eq.lhs)).epsilon(1e-12));
      CHECK(eq.lhs == doctest::Approx(hs_seminorm_squared(rho, 0.5 * alpha)).epsilon(1e-12));
      for (double p : {1.5, 3.0, 4.0}) {
        const auto r = verify_ipp(rho, p, alpha);
        CHECK(r.margin >= -1e-10 * std::abs(r.lhs));
      }
    }
  }
  const double ps[] = {2.0, 3.0};
  const double alphas[] = {0.5, 1.0};
  const auto rep = run_ipp_suite(5, ps, alphas, 7, g);
  CHECK(rep.checks == 20);
  CHECK(rep.violations == 0);
  CHECK(rep.p2_max_relative_margin < 1e-12);
  Field neg = gaussian(g, 1.0, 1.0);
  neg[0] = -1e-3;
  CHECK_THROWS_AS(verify_ipp(neg, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("Lp decay along a small-mass run") {
  const auto g = make_grid(512, 20.0);
  const double C_hat = 0.8;  // above the search estimate, so the bound is conservative
  SimState s{Frame::physical, 0.0, gaussian(g, 1.0, 1.0), FractionalExponent(1.0), 1.0};
  Observer obs;
  obs.interval = 0.05;
  StepControl c;
  c.dt_max = 5e-3;
  const auto traj = advance(s, 1.0, c, obs);
  for (double p : {2.0, 3.0}) {
    const auto rep = verify_lp_decay(traj, p, 1.0, C_hat);
    CHECK(rep.checks > 10);
    CHECK(rep.violations == 0);
    CHECK(rep.max_lhs < 0.0);
  }
}

TEST_CASE("supercritical inequality shape") {
  const auto g = make_grid(4096, 40.0);
  for (double alpha : {1.3, 1.8}) {
    const double p = 2.0;
    const auto base = gns_supercritical_check(gaussian(g, 1.0, 1.0), p, alpha);
    CHECK(base.exponent_beta == doctest::Approx(p / (p + alpha - 1.0)).epsilon(1e-15));
    CHECK(base.fitted_constant == doctest::Approx(base.lhs / base.rhs_shape).epsilon(1e-14));
    // homogeneous of degree zero in amplitude and dilation
    CHECK(gns_supercritical_check(gaussian(g, 5.0, 1.0), p, alpha).fitted_constant ==
          doctest::Approx(base.fitted_constant).epsilon(1e-12));
    CHECK(gns_supercritical_check(gaussian(make_grid(4096, 20.0), 1.0, 0.5), p, alpha).fitted_constant ==
          doctest::Approx(base.fitted_constant).epsilon(1e-12));
  }
  const std::vector<Field> corpus{gaussian(g, 1.0, 1.0), gaussian(g, 1.0, 0.4, 3.0)};
  CHECK(fit_supercritical_constant(corpus, 2.0, 1.5) >= gns_supercritical_check(corpus[0], 2.0, 1.5).fitted_constant);
  CHECK_THROWS(gns_supercritical_check(corpus[0], 2.0, 0.5));
}
