#include "bellint/nelder_mead.hpp"

#include <algorithm>
#include <numeric>

namespace bellint {
namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> fx;
};

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, const SimplexOptions& options) {
  const std::size_t dim = x0.size();
  SimplexResult result;
  auto eval = [&](const std::vector<double>& p) {
    ++result.evaluations;
    return f(p);
  };

  std::vector<double> best = std::move(x0);
  double best_f = eval(best);

  for (int round = 0; round <= options.max_restarts; ++round) {
    Simplex s;
    s.x.assign(dim + 1, best);
    s.fx.assign(dim + 1, best_f);
    for (std::size_t i = 0; i < dim; ++i) {
      s.x[i + 1][i] += options.initial_step;
      s.fx[i + 1] = eval(s.x[i + 1]);
    }

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    bool converged = false;
    while (result.evaluations < options.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.fx[a] < s.fx[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[dim - 1];
      if (s.fx[hi] - s.fx[lo] <= options.tolerance) {
        converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == hi) continue;
        for (std::size_t i = 0; i < dim; ++i) centroid[i] += s.x[v][i];
      }
      for (double& c : centroid) c /= static_cast<double>(dim);

      auto along = [&](double t, std::vector<double>& out) {
        for (std::size_t i = 0; i < dim; ++i) out[i] = centroid[i] + t * (s.x[hi][i] - centroid[i]);
      };

      along(-1.0, trial);
      const double fr = eval(trial);
      if (fr < s.fx[lo]) {
        along(-2.0, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          s.x[hi] = trial2;
          s.fx[hi] = fe;
        } else {
          s.x[hi] = trial;
          s.fx[hi] = fr;
        }
        continue;
      }
      if (fr < s.fx[second]) {
        s.x[hi] = trial;
        s.fx[hi] = fr;
        continue;
      }
      // Outside contraction if the reflection beat the worst point, inside otherwise.
      const bool outside = fr < s.fx[hi];
      along(outside ? -0.5 : 0.5, trial2);
      const double fc = eval(trial2);
      if (fc < (outside ? fr : s.fx[hi])) {
        s.x[hi] = trial2;
        s.fx[hi] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= dim; ++v) {
        if (v == lo) continue;
        for (std::size_t i = 0; i < dim; ++i) s.x[v][i] = s.x[lo][i] + 0.5 * (s.x[v][i] - s.x[lo][i]);
        s.fx[v] = eval(s.x[v]);
      }
    }

    const auto it = std::min_element(s.fx.begin(), s.fx.end());
    const double improvement = best_f - *it;
    if (*it < best_f) {
      best_f = *it;
      best = s.x[static_cast<std::size_t>(it - s.fx.begin())];
    }
    result.converged = converged;
    if (!converged || (round > 0 && improvement <= options.tolerance)) break;
  }

  result.x = std::move(best);
  result.f = best_f;
  return result;
}

}  // namespace bellint
