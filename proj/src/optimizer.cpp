#include "bellint/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "bellint/errors.hpp"
#include "bellint/loss_model.hpp"
#include "bellint/nelder_mead.hpp"
#include "bellint/parallel.hpp"
#include "bellint/random.hpp"

namespace bellint {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Vector3d unit_vector(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

struct StartOutcome {
  SimplexResult simplex;
  AngleVector start{};
};

void check_inputs(double v, int n, double eta, const OptimizerConfig& cfg) {
  if (n < 1) throw DomainError("pair count must be at least 1");
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  if (cfg.starts < 1) throw DomainError("at least one optimizer start is required");
  if (cfg.max_evaluations < 1) throw DomainError("evaluation budget must be positive");
}

}  // namespace

SettingQuad settings_from_angles(const AngleVector& a) {
  return {MeasurementSetting(unit_vector(a[0], a[1])), MeasurementSetting(unit_vector(a[2], a[3])),
          MeasurementSetting(unit_vector(a[4], a[5])), MeasurementSetting(unit_vector(a[6], a[7]))};
}

AngleVector angles_from_settings(const SettingQuad& settings) {
  AngleVector out{};
  for (std::size_t k = 0; k < 4; ++k) {
    const Eigen::Vector3d& b = settings[k].bloch();
    out[2 * k] = std::acos(std::clamp(b.z(), -1.0, 1.0));
    double phi = std::atan2(b.y(), b.x());
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi -= kTwoPi;
    out[2 * k + 1] = phi;
  }
  return out;
}

OptimizationResult minimize_s_n(double v, int n, double eta, const OptimizerConfig& cfg) {
  check_inputs(v, n, eta, cfg);
  const TwoQubitState state = werner_state(v);
  auto objective = [&](const std::vector<double>& x) {
    AngleVector a;
    std::copy(x.begin(), x.end(), a.begin());
    return s_n_eta(state, settings_from_angles(a), n, eta).s;
  };

  SimplexOptions options;
  options.tolerance = cfg.tolerance;
  options.max_evaluations = cfg.max_evaluations;

  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(cfg.starts));
  parallel_for(outcomes.size(), [&](std::size_t idx) {
    AngleVector start;
    if (idx == 0) {
      start = angles_from_settings(paper_settings());
    } else {
      RandomStream rng(cfg.seed, RandomStream::Purpose::OptimizerStart, idx);
      for (std::size_t k = 0; k < 4; ++k) {
        start[2 * k] = std::numbers::pi * rng.uniform();
        start[2 * k + 1] = kTwoPi * rng.uniform();
      }
    }
    outcomes[idx].start = start;
    outcomes[idx].simplex = nelder_mead(objective, {start.begin(), start.end()}, options);
  });

  OptimizationResult result;
  result.n = n;
  result.v = v;
  result.eta = eta;
  result.starts = cfg.starts;
  std::size_t best = 0;
  for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
    const SimplexResult& s = outcomes[idx].simplex;
    result.evaluations += s.evaluations;
    if (s.converged) ++result.converged_starts;
    if (s.f < outcomes[best].simplex.f) best = idx;
  }
  const SimplexResult& winner = outcomes[best].simplex;
  std::copy(winner.x.begin(), winner.x.end(), result.best_angles.begin());
  // Report the minimizer in canonical coordinates; the map to Bloch vectors
  // is unchanged, so the stored value is reproduced exactly from the angles.
  result.best_angles = angles_from_settings(settings_from_angles(result.best_angles));
  result.best_s = s_n_eta(state, settings_from_angles(result.best_angles), n, eta);
  result.converged = result.converged_starts > 0;
  if (!result.converged)
    throw NonConvergenceError("no optimizer start converged within the evaluation budget",
                              result);
  return result;
}

std::vector<SweepCell> sweep(const std::vector<double>& v_list, int n_max, double eta,
                             const OptimizerConfig& cfg, bool optimize) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (n_max > cfg.n_cap)
    throw DomainError("n_max " + std::to_string(n_max) + " exceeds the compute cap " +
                      std::to_string(cfg.n_cap));
  for (double v : v_list)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility must lie in [0, 1]");

  std::vector<SweepCell> cells(v_list.size() * static_cast<std::size_t>(n_max));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].result.v = v_list[i / n_max];
    cells[i].result.n = static_cast<int>(i % n_max) + 1;
    cells[i].result.eta = eta;
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    SweepCell& cell = cells[i];
    const double v = cell.result.v;
    const int n = cell.result.n;
    try {
      if (optimize) {
        cell.result = minimize_s_n(v, n, eta, cfg);
      } else {
        const SettingQuad settings = paper_settings();
        cell.result.best_angles = angles_from_settings(settings);
        cell.result.best_s = s_n_eta(werner_state(v), settings, n, eta);
        cell.result.converged = true;
        cell.result.evaluations = 1;
      }
    } catch (const NonConvergenceError& e) {
      cell.result = e.best_so_far();
      cell.failed = true;
      cell.error = e.what();
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });
  return cells;
}

int violation_threshold(double v, Parity parity, const OptimizerConfig& cfg, double eta) {
  int last = 0;
  int misses = 0;
  for (int n = parity == Parity::Odd ? 1 : 2; n <= cfg.n_cap; n += 2) {
    double s = 0.0;
    try {
      s = minimize_s_n(v, n, eta, cfg).best_s.s;
    } catch (const NonConvergenceError& e) {
      s = e.best_so_far().best_s.s;
    }
    if (s < BellValue::kClassicalBound - cfg.violation_margin) {
      last = n;
      misses = 0;
    } else if (++misses == 2) {
      break;
    }
  }
  return last;
}

}  // namespace bellint
