#include "fks/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fks {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is.  Plans are created once per size and kept for the process.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    const int ni = static_cast<int>(n);
    PlanPair p;
    p.forward = fftw_plan_dft_1d(ni, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_1d(ni, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    plans_.emplace(n, p);
    return p;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

void execute(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) {
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  if (in.data() == out.data()) {
    std::vector<cplx> tmp(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()), dst);
  } else {
    fftw_execute_dft(plan, src, dst);
  }
}

double gaussian_density(double x, double sigma) {
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

void normalize_mass(Field& f, double target) {
  const double m = mass(f);
  if (!(m > 0.0)) throw DomainTooSmall("synthesized profile has no mass on this grid");
  const double s = target / m;
  for (auto& v : f.values) v *= s;
}

// Relative size of a profile at the box edge, for families with fast tails.
void require_decay(double edge_value, double peak, std::string_view family) {
  if (edge_value > 1e-12 * peak) {
    throw DomainTooSmall("domain too small: " + std::string(family) +
                         " profile exceeds 1e-12 of its peak at the box boundary");
  }
}

}  // namespace

// ---- Grid -----------------------------------------------------------------

Grid::Grid(std::size_t n, double half_width) : n_(n), half_width_(half_width), dx_(0.0) {
  if (n < 16 || !is_power_of_two(n)) {
    throw std::invalid_argument("grid size must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("grid half width must be positive and finite");
  }
  dx_ = 2.0 * half_width / static_cast<double>(n);
  auto xs = std::make_shared<std::vector<double>>(n);
  auto ks = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    (*xs)[i] = -half_width + dx_ * static_cast<double>(i);
    (*ks)[i] = kPi * static_cast<double>(signed_index(i)) / half_width;
  }
  coordinates_ = std::move(xs);
  wavenumbers_ = std::move(ks);
}

double Grid::max_wavenumber() const noexcept {
  return kPi * static_cast<double>(n_ / 2) / half_width_;
}

Grid make_grid(std::size_t n, double half_width) { return Grid(n, half_width); }

Field::Field(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.n()) throw GridMismatch("field length does not match grid size");
}

void require_same_grid(const Grid& a, const Grid& b, std::string_view what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": grids differ");
}

// ---- transforms -----------------------------------------------------------

void fft_forward(std::span<const cplx> in, std::span<cplx> out) {
  execute(PlanCache::instance().get(in.size()).forward, in, out);
}

void fft_backward(std::span<const cplx> in, std::span<cplx> out) {
  execute(PlanCache::instance().get(in.size()).backward, in, out);
}

Spectrum transform(const Field& f) {
  const std::size_t n = f.size();
  std::vector<cplx> in(f.values.begin(), f.values.end());
  Spectrum s(f.grid);
  fft_forward(in, s.coeffs);
  const double dx = f.grid.dx();
  for (std::size_t m = 0; m < n; ++m) {
    // (-1)^m accounts for the box starting at x_0 = -L.
    s.coeffs[m] *= (m % 2 == 0) ? dx : -dx;
  }
  return s;
}

Field inverse_transform(const Spectrum& s) {
  const std::size_t n = s.coeffs.size();
  std::vector<cplx> in(n), out(n);
  const double w = 1.0 / s.grid.length();
  for (std::size_t m = 0; m < n; ++m) in[m] = s.coeffs[m] * ((m % 2 == 0) ? w : -w);
  fft_backward(in, out);
  Field f(s.grid);
  for (std::size_t i = 0; i < n; ++i) f.values[i] = out[i].real();
  return f;
}

// ---- norms ----------------------------------------------------------------

double mass(const Field& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return f.grid.dx() * acc;
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid, g.grid, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.values[i] * g.values[i];
  return f.grid.dx() * acc;
}

double lp_integral(const Field& f, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("lp_integral requires finite p >= 1");
  double acc = 0.0;
  if (p == 1.0) {
    for (double v : f.values) acc += std::abs(v);
  } else if (p == 2.0) {
    for (double v : f.values) acc += v * v;
  } else {
    for (double v : f.values) acc += std::pow(std::abs(v), p);
  }
  return f.grid.dx() * acc;
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p) && p > 0) return max_abs(f);
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  const double integral = lp_integral(f, p);
  if (p == 1.0) return integral;
  if (p == 2.0) return std::sqrt(integral);
  return std::pow(integral, 1.0 / p);
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }

double hs_seminorm_squared(const Field& f, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("hs_seminorm requires s in (0, 1]");
  const Spectrum spec = transform(f);
  const auto k = f.grid.wavenumbers();
  double acc = 0.0;
  for (std::size_t m = 1; m < spec.coeffs.size(); ++m) {
    acc += std::pow(std::abs(k[m]), 2.0 * s) * std::norm(spec.coeffs[m]);
  }
  return acc / f.grid.length();
}

double hs_seminorm(const Field& f, double s) { return std::sqrt(hs_seminorm_squared(f, s)); }

double first_moment(const Field& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::abs(f.grid.x(i)) * f.values[i];
  return f.grid.dx() * acc;
}

double spectral_tail_fraction(const Field& f) {
  const std::size_t n = f.size();
  std::vector<cplx> in(f.values.begin(), f.values.end()), out(n);
  fft_forward(in, out);
  const double cutoff = 7.0 / 16.0 * static_cast<double>(n);
  double total = 0.0, tail = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double e = std::norm(out[m]);
    total += e;
    if (std::abs(static_cast<double>(f.grid.signed_index(m))) > cutoff) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

double l1_distance(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "l1_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a.values[i] - b.values[i]);
  return a.grid.dx() * acc;
}

// ---- initial data ---------------------------------------------------------

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "cauchy") return Family::cauchy;
  if (name == "two_bump") return Family::two_bump;
  if (name == "indicator") return Family::indicator;
  throw std::invalid_argument("unknown initial family '" + std::string(name) + "'");
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::cauchy: return "cauchy";
    case Family::two_bump: return "two_bump";
    case Family::indicator: return "indicator";
  }
  return "unknown";
}

double wrapped_cauchy(double x, double scale, double m, double half_width) {
  // Poisson kernel on the circle: sum_k C_s(x + 2Lk) = (1/2L) sinh a / (cosh a - cos t),
  // a = pi s / L, t = pi x / L.  The denominator is rewritten to avoid cancellation.
  const double a = kPi * scale / half_width;
  const double t = kPi * x / half_width;
  const double sh = std::sinh(0.5 * a), sn = std::sin(0.5 * t);
  const double denom = 2.0 * (sh * sh + sn * sn);
  return m / (2.0 * half_width) * std::sinh(a) / denom;
}

double wrapped_gaussian(double x, double variance, double m, double half_width) {
  const double sigma = std::sqrt(variance);
  const double period = 2.0 * half_width;
  double acc = gaussian_density(x, sigma);
  for (int k = 1; k < 1000; ++k) {
    const double term = gaussian_density(x + k * period, sigma) + gaussian_density(x - k * period, sigma);
    acc += term;
    if (term < 1e-300 || term < 1e-18 * acc) break;
  }
  return m * acc;
}

Field synthesize_initial(const InitialProfile& profile, const Grid& grid) {
  const double M = profile.mass, s = profile.scale, c = profile.center;
  if (!(M > 0.0) || !std::isfinite(M)) throw std::invalid_argument("initial mass must be positive");
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("initial scale must be positive");
  if (!std::isfinite(c)) throw std::invalid_argument("initial center must be finite");
  const double L = grid.half_width();
  Field f(grid);

  switch (profile.family) {
    case Family::gaussian: {
      const double reach = L - std::abs(c);
      if (reach <= 0.0) throw DomainTooSmall("domain too small: gaussian center outside the box");
      require_decay(gaussian_density(reach, s), gaussian_density(0.0, s), "gaussian");
      for (std::size_t i = 0; i < grid.n(); ++i) f[i] = gaussian_density(grid.x(i) - c, s);
      break;
    }
    case Family::two_bump: {
      const double reach = L - std::abs(c) - 2.0 * s;
      if (reach <= 0.0) throw DomainTooSmall("domain too small: two_bump centers outside the box");
      require_decay(gaussian_density(reach, s), gaussian_density(0.0, s), "two_bump");
      for (std::size_t i = 0; i < grid.n(); ++i) {
        const double y = grid.x(i) - c;
        f[i] = 0.5 * (gaussian_density(y - 2.0 * s, s) + gaussian_density(y + 2.0 * s, s));
      }
      break;
    }
    case Family::cauchy: {
      // Heavy tails cannot be truncated; the periodic images are summed instead.
      // The box still has to be wide enough that the images barely lift the peak.
      const double excess = wrapped_cauchy(0.0, s, 1.0, L) * kPi * s - 1.0;
      if (excess > 1e-2) {
        throw DomainTooSmall("domain too small: periodic images lift the cauchy peak by more than 1%");
      }
      for (std::size_t i = 0; i < grid.n(); ++i) f[i] = wrapped_cauchy(grid.x(i) - c, s, 1.0, L);
      break;
    }
    case Family::indicator: {
      if (std::abs(c) + s >= L) throw DomainTooSmall("domain too small: indicator support leaves the box");
      if (s < 2.0 * grid.dx()) throw DomainTooSmall("indicator narrower than two grid cells");
      for (std::size_t i = 0; i < grid.n(); ++i) {
        const double d = std::abs(grid.x(i) - c);
        f[i] = d < s ? 1.0 : (d == s ? 0.5 : 0.0);
      }
      break;
    }
  }
  normalize_mass(f, M);
  return f;
}

// ---- CSV ------------------------------------------------------------------

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(std::ostream& os, const Field& f) {
  os << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    os << format_number(f.grid.x(i)) << ',' << format_number(f.values[i]) << '\n';
  }
}

void write_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field_csv(os, f);
}

Field read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,value") {
    throw std::invalid_argument("field CSV must start with header 'x,value'");
  }
  std::vector<double> xs, vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed field CSV row: " + line);
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) throw std::invalid_argument("field CSV has fewer than two rows");
  const double dx = xs[1] - xs[0];
  const double L = -xs.front();
  Grid g(xs.size(), L);
  if (std::abs(g.dx() - dx) > 1e-9 * std::abs(dx)) {
    throw std::invalid_argument("field CSV abscissae are not a periodic box grid");
  }
  return Field(g, std::move(vs));
}

}  // namespace fks
