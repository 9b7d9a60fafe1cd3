#pragma once

// Fractional Laplacian (two independent realizations), the chemotactic drift
// u = dc/dx from -c'' = rho, and the right-hand sides of the evolution in the
// physical and self-similar (rescaled) frames.

#include <memory>
#include <span>
#include <vector>

#include "fks/spectral.hpp"

namespace fks {

/// Exponent alpha of Lambda^alpha = (-Laplacian)^{alpha/2}, alpha in (0, 2].
class FractionalExponent {
 public:
  explicit FractionalExponent(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

struct DriftField {
  Grid grid;
  std::vector<double> values;
};

/// Symmetric singular-integral realization of Lambda^alpha on the periodic box:
///
///   Lambda^a f(x) = c_a * int_0^inf (2 f(x) - f(x+h) - f(x-h)) / h^{1+a} dh
///
/// h in [0, h_min] uses the even Taylor form of the symmetric difference,
/// [h_min, h_max] piecewise-cubic product integration on grid offsets, and the
/// periodic images beyond h_max are summed analytically.
struct QuadratureScheme {
  double h_min = 0.0;
  double h_max = 0.0;
  double c_alpha = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  /// Folded offset weights K_r, r = 0..n-1 (K_0 unused), in units of dx^{-alpha}.
  std::shared_ptr<const std::vector<double>> weights;
};

/// c_a = 2^a Gamma((1+a)/2) / (sqrt(pi) |Gamma(-a/2)|), the constant that makes the
/// one-sided singular integral reproduce the multiplier |xi|^a.
double fractional_constant(double alpha);

/// Requires alpha < 2.
QuadratureScheme make_quadrature_scheme(const Grid& grid, FractionalExponent alpha);

Field frac_laplacian_spectral(const Field& f, FractionalExponent alpha);
Field frac_laplacian_quadrature(const Field& f, FractionalExponent alpha, const QuadratureScheme& q);

/// d/dx by spectral multiplication with i k (Nyquist mode dropped).
Field spectral_derivative(const Field& f);

/// Mean-free periodic solution of -c'' = rho, returned as u = c'.  Equals the
/// whole-line drift -(1/2) sgn * rho plus the linear background (M/2L) x.
DriftField drift(const Field& rho);

enum class Frame { physical, rescaled };

/// How the confining term d/dy (y u) of the rescaled frame is discretized.
enum class Confinement {
  /// -xi d/dxi u_hat on the sampled transform (upwinded along the outgoing
  /// characteristics); the box state is the periodization of the line solution.
  characteristic,
  /// Spectral derivative of the grid product y * u with y the box coordinate.
  product,
};

struct DynamicsOptions {
  bool dealias = false;
  Confinement confinement = Confinement::characteristic;
};

/// -Lambda^a rho - chi d/dx (rho u).
Field rhs_physical(const Field& rho, FractionalExponent alpha, double chi, const DynamicsOptions& opts = {});
/// -Lambda u + d/dy (y u) - chi d/dy (u u_c); alpha must be 1.
Field rhs_rescaled(const Field& u, FractionalExponent alpha, double chi, const DynamicsOptions& opts = {});

/// Spectral-space evaluation of one frame's dynamics, split as
/// d/dt rho_hat = -symbol * rho_hat + N(rho_hat).  Works on raw FFT
/// coefficients R_m = sum_i rho_i exp(-2 pi i m i / n).
class Dynamics {
 public:
  Dynamics(Grid grid, FractionalExponent alpha, double chi, Frame frame, DynamicsOptions opts = {});

  const Grid& grid() const noexcept { return grid_; }
  Frame frame() const noexcept { return frame_; }
  double alpha() const noexcept { return alpha_; }
  double chi() const noexcept { return chi_; }
  const DynamicsOptions& options() const noexcept { return opts_; }

  /// Diffusion symbol per FFT slot (|k|^alpha; |k| in the rescaled frame).
  std::span<const double> symbol() const noexcept { return symbol_; }

  /// Nonlinear/non-diffusive part N in raw FFT coefficients.  `values` receives
  /// the physical field of rho_hat as a by-product.  Returns max |velocity|.
  double nonlinear(std::span<const cplx> rho_hat, std::span<cplx> out, std::span<double> values) const;

  /// Maximum transport speed of the field (drift, plus |y| confinement when rescaled).
  double max_velocity(const Field& rho) const;

 private:
  void confinement_characteristic(std::span<const cplx> rho_hat, std::span<cplx> out) const;

  Grid grid_;
  double alpha_;
  double chi_;
  Frame frame_;
  DynamicsOptions opts_;
  std::vector<double> symbol_;
  std::vector<double> keep_;  // dealiasing mask (1/0)
};

}  // namespace fks
