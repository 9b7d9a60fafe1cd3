#pragma once

// Uniform periodic discretization of a truncated line, Fourier transforms,
// quadrature and the norms used by every other module.
//
// Transform convention (used consistently across the library):
//
//   forward   f_hat(k_j) = dx * sum_i f_i exp(-i k_j x_i)
//   inverse   f_i        = 1/(2L) * sum_j f_hat(k_j) exp(+i k_j x_i)
//
// with x_i = -L + i dx and k_j = pi j / L, j in {-n/2, ..., n/2 - 1}.  The
// forward transform approximates the continuous transform int f e^{-i xi x} dx,
// so Parseval reads  dx sum |f_i|^2 = 1/(2L) sum_j |f_hat_j|^2  and the
// homogeneous seminorm is  |f|_{H^s}^2 = 1/(2L) sum_j |k_j|^{2s} |f_hat_j|^2,
// the discrete form of (1/2pi) int |xi|^{2s} |f_hat(xi)|^2 d xi.  With this
// weight  |f|_{H^{a/2}}^2 = dx sum f * Lambda^a f  holds exactly.
//
// Spectrum coefficients are stored in FFT order: slot m holds the signed
// wavenumber index j = m for m < n/2 and j = m - n otherwise.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fks {

using cplx = std::complex<double>;

/// Raised when a synthesized profile does not decay inside the box.
class DomainTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two objects live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Grid {
 public:
  Grid(std::size_t n, double half_width);

  std::size_t n() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return 2.0 * half_width_; }

  double x(std::size_t i) const noexcept { return -half_width_ + dx_ * static_cast<double>(i); }
  std::span<const double> coordinates() const noexcept { return *coordinates_; }

  /// Wavenumbers in FFT order (see header comment).
  std::span<const double> wavenumbers() const noexcept { return *wavenumbers_; }
  /// Signed index j of FFT slot m.
  long signed_index(std::size_t m) const noexcept {
    return m < n_ / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n_);
  }
  std::size_t nyquist_slot() const noexcept { return n_ / 2; }
  double max_wavenumber() const noexcept;

  bool operator==(const Grid& other) const noexcept {
    return n_ == other.n_ && half_width_ == other.half_width_;
  }

 private:
  std::size_t n_;
  double half_width_;
  double dx_;
  std::shared_ptr<const std::vector<double>> coordinates_;
  std::shared_ptr<const std::vector<double>> wavenumbers_;
};

/// n must be a power of two >= 16 and L > 0.
Grid make_grid(std::size_t n, double half_width);

struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(Grid g) : grid(std::move(g)), values(grid.n(), 0.0) {}
  Field(Grid g, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct Spectrum {
  Grid grid;
  std::vector<cplx> coeffs;

  explicit Spectrum(Grid g) : grid(std::move(g)), coeffs(grid.n(), cplx{}) {}
};

void require_same_grid(const Grid& a, const Grid& b, std::string_view what);

Spectrum transform(const Field& f);
Field inverse_transform(const Spectrum& s);

// Raw FFT helpers (no dx scaling, no phase).  forward: X_m = sum x_i e^{-2 pi i m i/n};
// backward: x_i = sum X_m e^{+2 pi i m i/n} (unnormalized).  Thread safe.
void fft_forward(std::span<const cplx> in, std::span<cplx> out);
void fft_backward(std::span<const cplx> in, std::span<cplx> out);

// ---- quadrature and norms -------------------------------------------------

double mass(const Field& f);
/// dx * sum f_i g_i
double inner(const Field& f, const Field& g);
/// p >= 1 or p = infinity.
double lp_norm(const Field& f, double p);
/// dx * sum |f_i|^p, the integral behind lp_norm.
double lp_integral(const Field& f, double p);
double max_abs(const Field& f);
double min_value(const Field& f);
/// Homogeneous Sobolev seminorm |f|_{H^s}, s in (0, 1].
double hs_seminorm(const Field& f, double s);
/// Squared seminorm, which avoids a sqrt/square round trip in ratios.
double hs_seminorm_squared(const Field& f, double s);
/// dx * sum |x_i| f_i
double first_moment(const Field& f);
/// Fraction of spectral energy carried by |j| > 7/8 * n/2.
double spectral_tail_fraction(const Field& f);
/// L1 distance between two fields.
double l1_distance(const Field& a, const Field& b);

// ---- initial data ---------------------------------------------------------

enum class Family { gaussian, cauchy, two_bump, indicator };

Family parse_family(std::string_view name);
std::string_view to_string(Family f);

struct InitialProfile {
  Family family = Family::gaussian;
  double mass = 1.0;
  double scale = 1.0;
  double center = 0.0;
};

/// Nonnegative field of mass M.  Families:
///   gaussian   normal density with standard deviation `scale`
///   cauchy     Cauchy density (1/pi) s/(s^2 + x^2), wrapped onto the periodic box
///   two_bump   two gaussians of std `scale` at center +/- 2*scale
///   indicator  constant on [center - scale, center + scale]
/// Throws DomainTooSmall when the profile is not contained in the box.
Field synthesize_initial(const InitialProfile& profile, const Grid& grid);

/// Cauchy density of scale s and mass M summed over all periodic images of the box.
double wrapped_cauchy(double x, double scale, double mass, double half_width);
/// Gaussian density of variance `variance` and mass M summed over periodic images.
double wrapped_gaussian(double x, double variance, double mass, double half_width);

// ---- CSV ------------------------------------------------------------------

/// Two columns `x,value`, header row, 17 significant digits.
void write_field_csv(std::ostream& os, const Field& f);
void write_field_csv(const std::string& path, const Field& f);
Field read_field_csv(std::istream& is);

/// Fixed 17-significant-digit formatting used by every CSV writer.
std::string format_number(double v);

}  // namespace fks
