#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "fks/spectral.hpp"

namespace fks::test {

inline Field gaussian(const Grid& g, double mass, double sigma, double center = 0.0) {
  Field f(g);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double z = (g.x(i) - center) / sigma;
    f[i] = mass * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  }
  return f;
}

inline Field cosine(const Grid& g, long j, double amp = 1.0, double offset = 0.0) {
  Field f(g);
  const double k = std::numbers::pi * static_cast<double>(j) / g.half_width();
  for (std::size_t i = 0; i < g.n(); ++i) f[i] = offset + amp * std::cos(k * g.x(i));
  return f;
}

inline Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Field f(g);
  for (auto& v : f.values) v = nd(rng);
  return f;
}

inline double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(f.grid.dx() * s);
}

// Cauchy density of scale s summed over the periodic images of [-L, L), with an integral tail.
inline double image_sum_cauchy(double x, double s, double L) {
  const double P = 2.0 * L;
  double acc = s / (s * s + x * x);
  const int K = 200000;
  for (int k = 1; k <= K; ++k) {
    const double a = x + k * P, b = x - k * P;
    acc += s / (s * s + a * a) + s / (s * s + b * b);
  }
  acc += 2.0 * s / (P * P * (K + 0.5));
  return acc / std::numbers::pi;
}

}  // namespace fks::test
