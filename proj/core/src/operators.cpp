#include "fks/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fks {

namespace {

constexpr double kPi = std::numbers::pi;

// 10-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 10> kGlNodes = {
    0.013046735741414140, 0.067468316655507744, 0.160295215850487796, 0.283302302935376405,
    0.425562830509184394, 0.574437169490815606, 0.716697697064623595, 0.839704784149512204,
    0.932531683344492256, 0.986953264258585860};
constexpr std::array<double, 10> kGlWeights = {
    0.033335672154344069, 0.074725674575290296, 0.109543181257991021, 0.134633359654998177,
    0.147762112357376435, 0.147762112357376435, 0.134633359654998177, 0.109543181257991021,
    0.074725674575290296, 0.033335672154344069};

std::vector<cplx> to_complex(const Field& f) { return {f.values.begin(), f.values.end()}; }

Field from_raw(const Grid& grid, std::span<const cplx> raw) {
  std::vector<cplx> out(raw.size());
  fft_backward(raw, out);
  Field f(grid);
  const double inv_n = 1.0 / static_cast<double>(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) f.values[i] = out[i].real() * inv_n;
  return f;
}

// sum_{q >= 1} (r + q n)^{-1-a} by direct summation plus an Euler-Maclaurin tail.
double image_sum(double r, double n, double a) {
  constexpr int kDirect = 8;
  double acc = 0.0;
  for (int q = 1; q < kDirect; ++q) acc += std::pow(r + q * n, -1.0 - a);
  const double z = r + kDirect * n;
  const double integral = std::pow(z, -a) / (n * a);
  const double f0 = std::pow(z, -1.0 - a);
  const double f1 = -(1.0 + a) * n * std::pow(z, -2.0 - a);
  const double f3 = -(1.0 + a) * (2.0 + a) * (3.0 + a) * n * n * n * std::pow(z, -4.0 - a);
  return acc + integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0;
}

}  // namespace

FractionalExponent::FractionalExponent(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("fractional exponent must lie in (0, 2], got " + std::to_string(alpha));
  }
}

double fractional_constant(double alpha) {
  return std::pow(2.0, alpha) * std::tgamma(0.5 * (1.0 + alpha)) /
         (std::sqrt(kPi) * std::abs(std::tgamma(-0.5 * alpha)));
}

QuadratureScheme make_quadrature_scheme(const Grid& grid, FractionalExponent alpha_exp) {
  const double a = alpha_exp.value();
  if (a >= 2.0) throw std::invalid_argument("singular-integral form is degenerate at alpha = 2; use the spectral operator");
  const std::size_t n = grid.n();
  // Unfolded weights for offsets m = 0..n+1 (units of dx), then folded mod n.
  std::vector<double> w(n + 2, 0.0);

  // [0, 1]: g(s) ~ A s^2 + B s^4 through g(1), g(2).
  w[1] += (16.0 / 12.0) / (2.0 - a) - (4.0 / 12.0) / (4.0 - a);
  w[2] += (-1.0 / 12.0) / (2.0 - a) + (1.0 / 12.0) / (4.0 - a);

  // [m, m+1], m = 1..n-1: cubic through offsets m-1, m, m+1, m+2 against s^{-1-a}.
  for (std::size_t m = 1; m < n; ++m) {
    std::array<double, 4> lw{};
    for (std::size_t g = 0; g < kGlNodes.size(); ++g) {
      const double t = kGlNodes[g];
      const double kernel = kGlWeights[g] * std::pow(static_cast<double>(m) + t, -1.0 - a);
      // Lagrange basis on local nodes -1, 0, 1, 2.
      lw[0] += kernel * (-(t) * (t - 1.0) * (t - 2.0) / 6.0);
      lw[1] += kernel * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0);
      lw[2] += kernel * (-(t + 1.0) * t * (t - 2.0) / 2.0);
      lw[3] += kernel * ((t + 1.0) * t * (t - 1.0) / 6.0);
    }
    for (std::size_t q = 0; q < 4; ++q) w[m - 1 + q] += lw[q];
  }

  std::vector<double> folded(n, 0.0);
  for (std::size_t m = 0; m < w.size(); ++m) folded[m % n] += w[m];
  // Offsets beyond h_max = n dx: trapezoid in m, summed over periodic images.
  const double nd = static_cast<double>(n);
  for (std::size_t r = 1; r < n; ++r) folded[r] += image_sum(static_cast<double>(r), nd, a);
  folded[0] = 0.0;  // g vanishes at multiples of the period

  // Lambda f_i = c dx^{-a} sum_r A_r (2 f_i - f_{i+r} - f_{i-r}) = c dx^{-a} sum_r K_r (f_i - f_{i+r}).
  auto sym = std::make_shared<std::vector<double>>(n, 0.0);
  for (std::size_t r = 1; r < n; ++r) (*sym)[r] = folded[r] + folded[n - r];

  QuadratureScheme q;
  q.h_min = grid.dx();
  q.h_max = grid.length();
  q.c_alpha = fractional_constant(a);
  q.alpha = a;
  q.n = n;
  q.weights = std::move(sym);
  return q;
}

Field frac_laplacian_spectral(const Field& f, FractionalExponent alpha) {
  const std::size_t n = f.size();
  auto in = to_complex(f);
  std::vector<cplx> hat(n);
  fft_forward(in, hat);
  const auto k = f.grid.wavenumbers();
  const double a = alpha.value();
  hat[0] = 0.0;
  for (std::size_t m = 1; m < n; ++m) hat[m] *= std::pow(std::abs(k[m]), a);
  return from_raw(f.grid, hat);
}

Field frac_laplacian_quadrature(const Field& f, FractionalExponent alpha, const QuadratureScheme& q) {
  if (alpha.value() >= 2.0) throw std::invalid_argument("quadrature operator requires alpha < 2");
  if (q.n != f.size() || q.alpha != alpha.value() || !q.weights) {
    throw std::invalid_argument("quadrature scheme was built for a different grid or exponent");
  }
  const std::size_t n = f.size();
  const auto& K = *q.weights;
  const double scale = q.c_alpha * std::pow(f.grid.dx(), -alpha.value());
  Field out(f.grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = f.values[i];
    double acc = 0.0;
    std::size_t j = i + 1;
    for (std::size_t r = 1; r < n; ++r, ++j) {
      if (j == n) j = 0;
      acc += K[r] * (fi - f.values[j]);
    }
    out.values[i] = scale * acc;
  }
  return out;
}

Field spectral_derivative(const Field& f) {
  const std::size_t n = f.size();
  auto in = to_complex(f);
  std::vector<cplx> hat(n);
  fft_forward(in, hat);
  const auto k = f.grid.wavenumbers();
  for (std::size_t m = 0; m < n; ++m) hat[m] *= cplx(0.0, k[m]);
  hat[f.grid.nyquist_slot()] = 0.0;
  return from_raw(f.grid, hat);
}

DriftField drift(const Field& rho) {
  const std::size_t n = rho.size();
  auto in = to_complex(rho);
  std::vector<cplx> hat(n);
  fft_forward(in, hat);
  const auto k = rho.grid.wavenumbers();
  hat[0] = 0.0;
  for (std::size_t m = 1; m < n; ++m) hat[m] *= cplx(0.0, 1.0 / k[m]);
  hat[rho.grid.nyquist_slot()] = 0.0;
  Field u = from_raw(rho.grid, hat);
  return DriftField{rho.grid, std::move(u.values)};
}

// ---- Dynamics -------------------------------------------------------------

Dynamics::Dynamics(Grid grid, FractionalExponent alpha, double chi, Frame frame, DynamicsOptions opts)
    : grid_(std::move(grid)), alpha_(alpha.value()), chi_(chi), frame_(frame), opts_(opts) {
  if (chi != 0.0 && chi != 1.0) throw std::invalid_argument("chi must be 0 or 1");
  if (frame == Frame::rescaled && alpha_ != 1.0) {
    throw std::invalid_argument("the rescaled frame is only defined for alpha = 1");
  }
  const std::size_t n = grid_.n();
  const auto k = grid_.wavenumbers();
  symbol_.resize(n);
  for (std::size_t m = 0; m < n; ++m) symbol_[m] = m == 0 ? 0.0 : std::pow(std::abs(k[m]), alpha_);
  keep_.assign(n, 1.0);
  if (opts_.dealias) {
    const double cutoff = static_cast<double>(n) / 3.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (std::abs(static_cast<double>(grid_.signed_index(m))) > cutoff) keep_[m] = 0.0;
    }
  }
}

void Dynamics::confinement_characteristic(std::span<const cplx> rho_hat, std::span<cplx> out) const {
  // Work with phase-corrected coefficients T_j = (-1)^m R_m so neighbours in j
  // are samples of one smooth function of the frequency.
  const std::size_t n = grid_.n();
  const auto k = grid_.wavenumbers();
  const double dk = kPi / grid_.half_width();
  const double e1 = std::exp(-dk), e2 = std::exp(-2.0 * dk);
  auto T = [&](std::size_t m) { return (m % 2 == 0) ? rho_hat[m % n] : -rho_hat[m % n]; };

  for (std::size_t m = 1; m < n; ++m) {
    const long j = grid_.signed_index(m);
    cplx d;  // e^{-|k|} d/dxi (e^{|xi|} u_hat) at k_j, upwinded away from xi = 0
    if (j == 1) {
      d = (T(1) - T(0) * e1) / dk;
    } else if (j > 1) {
      d = (3.0 * T(m) - 4.0 * T(m - 1) * e1 + T(m - 2) * e2) / (2.0 * dk);
    } else if (j == -1) {
      d = (T(0) * e1 - T(m)) / dk;
    } else {
      d = (-3.0 * T(m) + 4.0 * T(m + 1) * e1 - T(m + 2) * e2) / (2.0 * dk);
    }
    const cplx c = -k[m] * d + std::abs(k[m]) * T(m);
    out[m] += (m % 2 == 0) ? c : -c;
  }
}

double Dynamics::nonlinear(std::span<const cplx> rho_hat, std::span<cplx> out, std::span<double> values) const {
  const std::size_t n = grid_.n();
  const auto k = grid_.wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(n);
  thread_local std::vector<cplx> a, b;
  a.resize(n);
  b.resize(n);

  fft_backward(rho_hat, a);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i].real() * inv_n;
  std::fill(out.begin(), out.end(), cplx{});
  double vmax = 0.0;

  if (chi_ != 0.0) {
    for (std::size_t m = 0; m < n; ++m) {
      a[m] = (m == 0 || m == grid_.nyquist_slot()) ? cplx{} : rho_hat[m] * cplx(0.0, keep_[m] / k[m]);
    }
    fft_backward(a, b);  // b = n * u
    for (std::size_t i = 0; i < n; ++i) {
      const double u = b[i].real() * inv_n;
      const double v = (frame_ == Frame::rescaled ? -grid_.x(i) : 0.0) + chi_ * u;
      vmax = std::max(vmax, std::abs(v));
      b[i] = cplx(u, 0.0);
    }
    if (opts_.dealias) {
      for (std::size_t m = 0; m < n; ++m) a[m] = rho_hat[m] * keep_[m];
      fft_backward(a, a);
      for (std::size_t i = 0; i < n; ++i) b[i] = cplx(a[i].real() * inv_n * b[i].real(), 0.0);
    } else {
      for (std::size_t i = 0; i < n; ++i) b[i] = cplx(values[i] * b[i].real(), 0.0);
    }
    fft_forward(b, a);  // flux rho * u
    for (std::size_t m = 0; m < n; ++m) out[m] -= chi_ * cplx(0.0, k[m]) * a[m] * keep_[m];
    out[grid_.nyquist_slot()] = 0.0;
  } else if (frame_ == Frame::rescaled) {
    vmax = grid_.half_width();
  }

  if (frame_ == Frame::rescaled) {
    if (opts_.confinement == Confinement::characteristic) {
      confinement_characteristic(rho_hat, out);
    } else {
      for (std::size_t i = 0; i < n; ++i) a[i] = cplx(grid_.x(i) * values[i], 0.0);
      fft_forward(a, b);
      for (std::size_t m = 0; m < n; ++m) out[m] += cplx(0.0, k[m]) * b[m];
      out[grid_.nyquist_slot()] = 0.0;
    }
  }
  out[0] = 0.0;
  return vmax;
}

double Dynamics::max_velocity(const Field& rho) const {
  double vmax = 0.0;
  if (chi_ != 0.0 || frame_ == Frame::rescaled) {
    std::vector<double> u(grid_.n(), 0.0);
    if (chi_ != 0.0) u = drift(rho).values;
    for (std::size_t i = 0; i < grid_.n(); ++i) {
      const double v = (frame_ == Frame::rescaled ? -grid_.x(i) : 0.0) + chi_ * u[i];
      vmax = std::max(vmax, std::abs(v));
    }
  }
  return vmax;
}

// ---- right-hand sides -----------------------------------------------------

namespace {

Field evaluate_rhs(const Field& rho, const Dynamics& dyn) {
  const std::size_t n = rho.size();
  auto in = to_complex(rho);
  std::vector<cplx> hat(n), nl(n);
  fft_forward(in, hat);
  std::vector<double> values(n);
  dyn.nonlinear(hat, nl, values);
  const auto sym = dyn.symbol();
  for (std::size_t m = 0; m < n; ++m) nl[m] -= sym[m] * hat[m];
  nl[0] = 0.0;
  return from_raw(rho.grid, nl);
}

}  // namespace

Field rhs_physical(const Field& rho, FractionalExponent alpha, double chi, const DynamicsOptions& opts) {
  return evaluate_rhs(rho, Dynamics(rho.grid, alpha, chi, Frame::physical, opts));
}

Field rhs_rescaled(const Field& u, FractionalExponent alpha, double chi, const DynamicsOptions& opts) {
  return evaluate_rhs(u, Dynamics(u.grid, alpha, chi, Frame::rescaled, opts));
}

}  // namespace fks
