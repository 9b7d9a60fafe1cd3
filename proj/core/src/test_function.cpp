#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fks/analysis.hpp"
#include "fks/operators.hpp"

namespace fks {

namespace {

double smoothstep(double v) { return v * v * v * (10.0 + v * (-15.0 + 6.0 * v)); }
double smoothstep_prime(double v) { return 30.0 * v * v * (1.0 - v) * (1.0 - v); }
// int_0^v S
double smoothstep_integral(double v) { return v * v * v * v * (2.5 + v * (-3.0 + v)); }

// sum over even m of binom(gamma, m) x^m H^{gamma-m-alpha} / (m + alpha - gamma)
double tail_series(double gamma, double alpha, double x, double H) {
  double coef = 1.0;  // binom(gamma, m)
  double acc = 0.0;
  const double r = x / H;
  double rpow = 1.0;
  for (int m = 0; m < 200; m += 2) {
    const double term = coef * rpow / (m + alpha - gamma);
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    coef *= (gamma - m) * (gamma - m - 1) / ((m + 1.0) * (m + 2.0));
    rpow *= r * r;
  }
  return acc * std::pow(H, gamma - alpha);
}

}  // namespace

PhiProfile::PhiProfile(double beta) : beta_(beta), gamma_(1.0 - beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  g2_ = gamma_ * std::pow(2.0, -beta);
  const double g2_prime = -beta * gamma_ * std::pow(2.0, -beta - 1.0);
  a_ = -0.5 * g2_prime / (1.0 - g2_);
  const double theta = (std::pow(2.0, gamma_) - 1.0 - g2_) / (1.0 - g2_);
  tau_ = 2.0 * (theta - 2.0 * a_ / 3.0) / (1.0 - a_);
  if (!(tau_ > 0.0 && tau_ <= 1.0) || !(a_ < 1.0)) {
    throw std::invalid_argument("no monotone blend of |x| and |x|^{1-beta} for beta = " + std::to_string(beta));
  }
}

double PhiProfile::value(double x) const {
  const double y = std::abs(x);
  if (y <= 1.0) return y;
  if (y >= 2.0) return std::pow(y, gamma_);
  const double t = y - 1.0;
  const double w = std::min(t / tau_, 1.0);
  const double Q = (1.0 - a_) * tau_ * (w - smoothstep_integral(w)) + a_ * (t - t * t * t / 3.0);
  return 1.0 + g2_ * t + (1.0 - g2_) * Q;
}

double PhiProfile::derivative(double x) const {
  const double y = std::abs(x);
  const double s = x < 0.0 ? -1.0 : 1.0;
  if (y <= 1.0) return x == 0.0 ? 0.0 : s;
  if (y >= 2.0) return s * gamma_ * std::pow(y, -beta_);
  const double t = y - 1.0;
  const double q = (t < tau_ ? (1.0 - a_) * (1.0 - smoothstep(t / tau_)) : 0.0) + a_ * (1.0 - t * t);
  return s * (g2_ + (1.0 - g2_) * q);
}

double PhiProfile::second_derivative(double x) const {
  const double y = std::abs(x);
  if (y < 1.0) return 0.0;
  if (y >= 2.0) return -beta_ * gamma_ * std::pow(y, -beta_ - 1.0);
  const double t = y - 1.0;
  const double dq = (t < tau_ ? -(1.0 - a_) * smoothstep_prime(t / tau_) / tau_ : 0.0) - 2.0 * a_ * t;
  return (1.0 - g2_) * dq;
}

double omega_value(const PhiProfile& phi, double alpha, double x) {
  const double gamma = 1.0 - phi.beta();
  const double fx = phi.value(x);
  const double H = 50.0 * (std::abs(x) + 2.0);

  // Nodes in h where x + h or x - h crosses a break of phi.
  const double tau = phi.tau();
  std::vector<double> nodes;
  for (double b : {0.0, 1.0, 1.0 + tau, 2.0, -1.0, -1.0 - tau, -2.0}) {
    const double h = std::abs(x - b);
    if (h > 1e-12 && h < H) nodes.push_back(h);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double u, double v) { return std::abs(u - v) < 1e-12; }),
              nodes.end());
  const double eps = 1e-4 * std::min(1.0, nodes.empty() ? 1.0 : nodes.front());

  auto integrand = [&](double h) {
    return (phi.value(x + h) + phi.value(x - h) - 2.0 * fx) / std::pow(h, 1.0 + alpha);
  };

  // [0, eps]: leading term of the symmetric difference.
  double acc;
  if (std::abs(x) < 1e-12) {
    acc = 2.0 * std::pow(eps, 1.0 - alpha) / (1.0 - alpha);
  } else {
    acc = phi.second_derivative(x) * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
  }

  boost::math::quadrature::tanh_sinh<double> ts;
  double lo = eps;
  nodes.push_back(H);
  for (double hi : nodes) {
    if (hi <= lo) continue;
    acc += ts.integrate(integrand, lo, hi, 1e-11);
    lo = hi;
  }
  // h > H: both x + h and x - h lie in the power-law region.
  acc += 2.0 * tail_series(gamma, alpha, x, H) - 2.0 * fx * std::pow(H, -alpha) / alpha;
  return fractional_constant(alpha) * acc;
}

double TestFunction::omega_at(double x) const { return omega_value(profile, alpha, x); }

double default_beta(double alpha) { return 1.0 - 0.5 * alpha; }

Grid default_test_grid() { return Grid(16384, 128.0); }

TestFunction build_test_function(double alpha, double beta, const Grid& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("test function requires 0 < alpha < 1");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("test function requires 0 < beta < 1");
  if (!(alpha + beta > 1.0)) throw std::invalid_argument("test function requires alpha + beta > 1");

  TestFunction tf{alpha, beta, grid, PhiProfile(beta), {}, {}, {}, 0.0, 0.0};
  const std::size_t n = grid.n();
  tf.phi.resize(n);
  tf.phi_prime.resize(n);
  tf.omega.resize(n);
  // phi and omega are even; x_{n-i} = -x_i on the periodic grid.
  for (std::size_t i = 0; i <= n / 2; ++i) {
    const double x = grid.x(i);
    tf.phi[i] = tf.profile.value(x);
    tf.phi_prime[i] = tf.profile.derivative(x);
    tf.omega[i] = omega_value(tf.profile, alpha, x);
    if (i > 0 && i < n / 2) {
      tf.phi[n - i] = tf.phi[i];
      tf.phi_prime[n - i] = -tf.phi_prime[i];
      tf.omega[n - i] = tf.omega[i];
    }
  }
  const double gamma = 1.0 - beta;
  double c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) c = std::max(c, tf.omega[i] / (1.0 + std::pow(std::abs(grid.x(i)), gamma)));
  tf.C_omega = c;

  // R' vanishes on |y| < 1; dense sampling of [1, 2] and a log-spaced sweep beyond.
  double cr = 0.0;
  auto probe = [&](double y) { cr = std::max(cr, std::abs(tf.profile.derivative(y) - 1.0) / tf.profile.value(y)); };
  for (int k = 0; k <= 20000; ++k) probe(1.0 + k / 20000.0);
  for (int k = 0; k <= 4000; ++k) probe(2.0 * std::pow(10.0, 6.0 * k / 4000.0));
  tf.C_remainder = cr;
  return tf;
}

TestFunction build_test_function(double alpha, double beta) {
  return build_test_function(alpha, beta, default_test_grid());
}

}  // namespace fks
