#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fks/analysis.hpp"
#include "fks/operators.hpp"
#include "helpers.hpp"

using namespace fks;
using fks::test::gaussian;

namespace {

// omega(0) = 2 c_a int_0^inf phi(h) h^{-1-a} dh, split at 1 and 2: phi(h) = h below 1
// and h^{1-beta} beyond 2 integrate in closed form, the blend by composite Simpson.
double omega_at_zero(const PhiProfile& phi, double a) {
  const double g = 1.0 - phi.beta();
  const int m = 4000;
  const double h = 1.0 / m;
  double simpson = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double x = 1.0 + i * h;
    const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    simpson += w * phi.value(x) / std::pow(x, 1.0 + a);
  }
  simpson *= h / 3.0;
  const double integral = 1.0 / (1.0 - a) + simpson + std::pow(2.0, g - a) / (a - g);
  return 2.0 * fractional_constant(a) * integral;
}

DiagnosticsRow row(double linf, double tail) {
  DiagnosticsRow r;
  r.mass = 1.0;
  r.l_inf = linf;
  r.tail_fraction = tail;
  return r;
}

}  // namespace

TEST_CASE("phi profile") {
  for (double beta : {0.55, 0.75, 0.9}) {
    CAPTURE(beta);
    const PhiProfile phi(beta);
    CHECK(phi.value(0.5) == 0.5);
    CHECK(phi.value(-0.25) == 0.25);
    CHECK(phi.value(4.0) == std::pow(4.0, 1.0 - beta));
    CHECK(phi.value(-7.0) == std::pow(7.0, 1.0 - beta));

    double prev = 0.0;
    for (int i = 1; i <= 4000; ++i) {
      const double x = i * 1e-3;
      CHECK(phi.value(x) == phi.value(-x));
      CHECK(phi.value(x) >= prev);
      CHECK(phi.derivative(x) >= -1e-12);
      prev = phi.value(x);
    }
    // derivative against centered differences across the blend
    for (double x : {1.1, 1.5, 1.9, 2.5}) {
      const double h = 1e-5;
      CHECK(phi.derivative(x) == doctest::Approx((phi.value(x + h) - phi.value(x - h)) / (2 * h)).epsilon(1e-7));
    }
    int bad = 0;
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) {
        const double x = -5.0 + 0.1 * i, y = -5.0 + 0.1 * j;
        bad += phi.value(x + y) > phi.value(x) + phi.value(y) + 1e-10;
      }
    CHECK(bad == 0);
  }
}

TEST_CASE("test function and omega") {
  CHECK_THROWS_AS(build_test_function(0.5, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(build_test_function(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_test_function(0.5, 1.0), std::invalid_argument);
  CHECK(default_beta(0.5) == 0.75);

  for (double a : {0.3, 0.5, 0.8}) {
    CAPTURE(a);
    const double beta = default_beta(a);
    const auto tf = build_test_function(a, beta, Grid(4096, 32.0));
    const std::size_t mid = tf.grid.n() / 2;
    CHECK(tf.omega[mid] == doctest::Approx(omega_at_zero(tf.profile, a)).epsilon(1e-8));
    CHECK(tf.omega_at(0.0) == doctest::Approx(tf.omega[mid]).epsilon(1e-12));
    for (std::size_t i = 1; i < tf.grid.n(); ++i) {
      CHECK(tf.phi[i] == tf.phi[tf.grid.n() - i]);
      CHECK(tf.omega[i] <= tf.C_omega * (1.0 + std::pow(std::abs(tf.grid.x(i)), 1.0 - beta)) * (1 + 1e-12));
    }

    // refine the grid (4x points, 4x width) and refit
    const auto fine = build_test_function(a, beta, Grid(16384, 128.0));
    CHECK(std::abs(fine.C_omega - tf.C_omega) < 0.05 * tf.C_omega);
    CHECK(fine.C_omega < 2.0 * tf.omega[mid] * (1.0 + 1e-12));
  }
}

TEST_CASE("corrected moment") {
  const auto tf = build_test_function(0.5, 0.75, Grid(4096, 32.0));
  const auto g = make_grid(2048, 20.0);
  CHECK_THROWS_AS(corrected_moment(gaussian(g, 1.0, 1.0), tf, 0.0), std::invalid_argument);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Field rho(g);
    for (auto& v : rho.values) v = u(rng) * u(rng);
    const double fm = first_moment(rho);
    for (double lam : {0.01, 0.3, 1.0, 4.0, 50.0}) CHECK(corrected_moment(rho, tf, lam) <= fm * (1.0 + 1e-14));
  }

  const double lam = 0.25;
  Field inside = gaussian(g, 1.0, 0.2);
  for (std::size_t i = 0; i < g.n(); ++i)
    if (std::abs(g.x(i)) > 1.0 / lam) inside[i] = 0.0;
  CHECK(corrected_moment(inside, tf, lam) == doctest::Approx(first_moment(inside)).epsilon(1e-14));

  CHECK(corrected_moment(gaussian(g, 1.0, 0.05, 0.5), tf, 1.0) == doctest::Approx(0.5).epsilon(1e-4));

  for (int i = 0; i < 2000; ++i) {
    const double x = -20.0 + 0.02 * i;
    for (double l : {0.1, 1.0, 10.0}) CHECK(tf.profile.value(l * x) / l <= std::abs(x) + 1e-15);
  }
}

TEST_CASE("lambda balancing") {
  const auto c = choose_lambda(3.0, 0.5, 1.5);
  CHECK(c.lambda == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.mu == 3.0);
  CHECK(choose_lambda(6.0, 0.5, 1.5).lambda == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(choose_lambda(2.0, 0.3, 0.7).lambda == doctest::Approx(std::pow(0.7, 1.0 / 0.7)).epsilon(1e-14));
  CHECK_THROWS_AS(choose_lambda(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(choose_lambda(0.0, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("global smallness criterion") {
  const auto g = make_grid(1024, 20.0);
  Field tiny(g);
  tiny[g.n() / 2] = 1e-300;
  const auto r0 = check_global_smallness(tiny, 1.0, 0.8);
  CHECK(r0.margin == doctest::Approx(4.0 / 0.8).epsilon(1e-12));
  CHECK(r0.satisfied);

  const auto f = gaussian(g, 1.0, 1.0);
  Field f3 = f;
  for (auto& v : f3.values) v *= 3.0;
  const auto a = check_global_smallness(f, 0.5, 0.7);
  const auto b = check_global_smallness(f3, 0.5, 0.7);
  CHECK(a.lhs == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-14));
  CHECK(b.lhs == doctest::Approx(3.0 * a.lhs).epsilon(1e-14));
  CHECK(b.margin == doctest::Approx(a.margin - 2.0 * a.lhs).epsilon(1e-12));
  CHECK_THROWS_AS(check_global_smallness(f, 1.5, 0.7), std::invalid_argument);
}

TEST_CASE("blow-up criterion") {
  const auto tf = build_test_function(0.5, 0.75, Grid(4096, 32.0));
  const double M = 100.0;
  const auto crit = make_blowup_criterion(tf, M);
  CHECK(crit.alpha + crit.beta > 1.0);
  CHECK(crit.lambda > 0.0);
  CHECK(crit.lambda == doctest::Approx(std::pow(crit.mu / M, 2.0)).epsilon(1e-12));

  const auto g = make_grid(4096, 40.0);
  const auto narrow = check_blowup_criterion(gaussian(g, M, 0.05), 0.5, crit, tf);
  const auto wide = check_blowup_criterion(gaussian(g, M, 5.0), 0.5, crit, tf);
  CHECK(narrow.satisfied);
  CHECK_FALSE(wide.satisfied);
  CHECK(narrow.margin > wide.margin);

  // first moment is linear in the scale, so lhs follows s^{1 - alpha}
  const auto w2 = check_blowup_criterion(gaussian(g, M, 2.5), 0.5, crit, tf);
  CHECK(wide.lhs == doctest::Approx(std::sqrt(2.0) * w2.lhs).epsilon(1e-5));

  CHECK_THROWS_AS(check_blowup_criterion(gaussian(g, M, 1.0, 0.5), 0.5, crit, tf), std::invalid_argument);
  CHECK_THROWS_AS(check_blowup_criterion(gaussian(g, 2.0 * M, 1.0), 0.5, crit, tf), std::invalid_argument);

  std::ostringstream os;
  const CriterionReport reps[] = {narrow};
  write_criteria_csv(os, reps);
  CHECK(os.str().rfind("criterion,quantity,value\n", 0) == 0);
}

TEST_CASE("blow-up classification") {
  const auto init = row(1.0, 1e-20);
  CHECK_FALSE(classify_blowup(init, row(2e4, 1e-3), false));
  CHECK_FALSE(classify_blowup(init, row(5.0, 0.5), false));
  CHECK(classify_blowup(init, row(5.0, 0.5), true) == Outcome::resolution_lost);
  CHECK(classify_blowup(init, row(2e4, 0.5), false) == Outcome::blowup_detected);
  CHECK(classify_blowup(init, row(2e4, 0.5), true) == Outcome::blowup_detected);
  CHECK_FALSE(classify_blowup(init, row(2e4, 0.05), true));
  CHECK(classify_blowup(init, row(50.0, 0.5), false, {10.0, 0.1}) == Outcome::blowup_detected);

  const DiagnosticsRow rows[] = {init, row(3.0, 0.01), row(2e4, 0.2)};
  CHECK(detect_blowup(rows) == Outcome::blowup_detected);
  CHECK_FALSE(detect_blowup(std::span(rows, 2)));
  CHECK_THROWS_AS(detect_blowup(std::span<const DiagnosticsRow>{}), std::invalid_argument);

  // pure diffusion never triggers
  const auto g = make_grid(512, 20.0);
  Observer obs;
  obs.interval = 0.5;
  obs.monitor = [](const DiagnosticsRow& i, const DiagnosticsRow& c, bool fin) { return classify_blowup(i, c, fin); };
  SimState s{Frame::physical, 0.0, gaussian(g, 50.0, 0.3), FractionalExponent(0.5), 0.0};
  const auto traj = advance(s, 3.0, StepControl{}, obs);
  CHECK(traj.outcome == Outcome::completed);
  for (std::size_t i = 1; i < traj.diagnostics.size(); ++i)
    CHECK(traj.diagnostics[i].l_inf <= traj.diagnostics[i - 1].l_inf * (1 + 1e-12));
}

TEST_CASE("self-similar residual") {
  const auto g = make_grid(1024, 20.0);
  const auto u = gaussian(g, 2.0, 1.0);
  CHECK(selfsimilar_residual(u, u) == 0.0);

  // half-cell shift through the spectral phase
  auto s = transform(u);
  for (std::size_t m = 0; m < g.n(); ++m)
    s.coeffs[m] *= std::polar(1.0, -0.5 * g.dx() * g.wavenumbers()[m]);
  s.coeffs[g.nyquist_slot()] = 0.0;
  const auto shifted = inverse_transform(s);
  double deriv_l1 = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double x = g.x(i);
    deriv_l1 += std::abs(x) * u[i];  // |u'| = |x| u for the unit-variance Gaussian
  }
  deriv_l1 *= g.dx();
  const double r = selfsimilar_residual(u, shifted);
  CHECK(r > 0.0);
  CHECK(r <= g.dx() * deriv_l1 / mass(u));
  CHECK(r == doctest::Approx(0.5 * g.dx() * deriv_l1 / mass(u)).epsilon(1e-3));
  CHECK_THROWS_AS(selfsimilar_residual(u, gaussian(make_grid(512, 20.0), 2.0, 1.0)), GridMismatch);
}

TEST_CASE("diagnostics table") {
  const auto tf = std::make_shared<const TestFunction>(build_test_function(0.5, 0.75, Grid(4096, 32.0)));
  const auto g = make_grid(512, 20.0);
  SimState s{Frame::physical, 0.25, gaussian(g, 2.0, 1.0), FractionalExponent(0.5), 1.0};
  const auto d = make_diagnoser(tf, 0.7)(s);
  CHECK(d.time == 0.25);
  CHECK(d.mass == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d.l_inv_alpha == doctest::Approx(lp_norm(s.field, 2.0)).epsilon(1e-14));
  CHECK(d.i_lambda == doctest::Approx(corrected_moment(s.field, *tf, 0.7)).epsilon(1e-14));
  CHECK(std::isnan(make_diagnoser(nullptr, 1.0)(s).i_lambda));
  CHECK(d.tail_fraction >= 0.0);
  CHECK(d.tail_fraction <= 1.0);

  std::stringstream ss;
  const DiagnosticsRow rows[] = {d, d};
  write_diagnostics_csv(ss, rows);
  CHECK(ss.str().rfind("time,mass,l2,l_inv_alpha,l_inf,first_moment,i_lambda,min_value,tail_fraction\n", 0) == 0);
  const auto back = read_diagnostics_csv(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].i_lambda == d.i_lambda);
  CHECK(back[1].l2 == d.l2);
}
