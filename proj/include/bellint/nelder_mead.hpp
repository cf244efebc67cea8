#pragma once

#include <functional>
#include <vector>

namespace bellint {

struct SimplexOptions {
  double initial_step = 0.25;
  /// Stop when the spread of objective values over the simplex is below this.
  double tolerance = 1e-9;
  int max_evaluations = 20000;
  /// After a converged run, rebuild the simplex around the best point and
  /// continue while this improves the minimum by more than `tolerance`.
  int max_restarts = 4;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead downhill simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) started from an axis-aligned simplex around `x0`.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, const SimplexOptions& options);

}  // namespace bellint
