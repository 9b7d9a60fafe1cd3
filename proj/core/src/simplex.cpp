#include "fks/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fks {

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> start,
                          const SimplexOptions& opts) {
  if (opts.max_evaluations < 1) throw std::invalid_argument("nelder_mead needs at least one evaluation");
  const std::size_t d = start.size();
  SimplexResult best;
  long evals = 0;

  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = f(x);
    if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    if (best.x.empty() || v < best.value) {
      best.x = x;
      best.value = v;
    }
    return v;
  };
  auto budget_left = [&] { return evals < opts.max_evaluations; };

  std::vector<std::vector<double>> pts{start};
  std::vector<double> vals{eval(start)};
  for (std::size_t i = 0; i < d && budget_left(); ++i) {
    auto p = start;
    p[i] += opts.initial_step;
    pts.push_back(p);
    vals.push_back(eval(p));
  }
  if (pts.size() < d + 1 || d == 0) {
    best.evaluations = evals;
    return best;
  }

  std::vector<std::size_t> order(d + 1);
  while (budget_left()) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t lo = order.front(), hi = order.back(), second = order[d - 1];
    if (std::isfinite(vals[hi]) && vals[hi] - vals[lo] <= opts.value_tolerance * (1.0 + std::abs(vals[lo]))) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k <= d; ++k) {
      if (k == hi) continue;
      for (std::size_t i = 0; i < d; ++i) centroid[i] += pts[k][i] / static_cast<double>(d);
    }
    auto along = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = centroid[i] + t * (pts[hi][i] - centroid[i]);
      return p;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < vals[lo]) {
      if (!budget_left()) break;
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[hi] = xe;
        vals[hi] = fe;
      } else {
        pts[hi] = xr;
        vals[hi] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[hi] = xr;
      vals[hi] = fr;
      continue;
    }
    if (!budget_left()) break;
    const bool outside = fr < vals[hi];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[hi])) {
      pts[hi] = xc;
      vals[hi] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k <= d && budget_left(); ++k) {
      if (k == lo) continue;
      for (std::size_t i = 0; i < d; ++i) pts[k][i] = pts[lo][i] + 0.5 * (pts[k][i] - pts[lo][i]);
      vals[k] = eval(pts[k]);
    }
  }
  best.evaluations = evals;
  return best;
}

}  // namespace fks
