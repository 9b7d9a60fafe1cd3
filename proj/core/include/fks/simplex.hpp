#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fks {

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  long evaluations = 0;
};

struct SimplexOptions {
  long max_evaluations = 200;
  double initial_step = 0.5;
  /// Stop when the spread of simplex values falls below this.
  double value_tolerance = 1e-12;
};

/// Nelder-Mead minimization.  The objective may return +inf for rejected points.
/// Evaluates the start point first; never exceeds max_evaluations.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> start,
                          const SimplexOptions& opts = {});

}  // namespace fks
