#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bellint/quantum_core.hpp"

namespace bellint {

/// Polar and azimuthal angle of each of the four Bloch vectors, laid out as
/// {theta_A1, phi_A1, theta_A2, phi_A2, theta_B1, phi_B1, theta_B2, phi_B2}.
using AngleVector = std::array<double, 8>;

SettingQuad settings_from_angles(const AngleVector& angles);

/// Inverse map with theta in [0, pi] and phi in [0, 2 pi).
AngleVector angles_from_settings(const SettingQuad& settings);

struct OptimizerConfig {
  int starts = 32;
  /// Simplex stops once max f - min f over its vertices falls below this.
  double tolerance = 1e-9;
  int max_evaluations = 20000;  ///< per start
  std::uint64_t seed = 20240601;
  /// Largest n accepted by sweep() and violation_threshold().
  int n_cap = 24;
  /// Bell value must be below 1 - margin to count as a violation.
  double violation_margin = 1e-7;
};

struct OptimizationResult {
  AngleVector best_angles{};
  BellValue best_s;
  int n = 0;
  double v = 0.0;
  double eta = 1.0;
  int starts = 0;
  int converged_starts = 0;
  bool converged = false;
  long evaluations = 0;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, OptimizationResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const OptimizationResult& best_so_far() const { return best_; }

 private:
  OptimizationResult best_;
};

/// Minimizes s_n_eta(werner(v), settings_from_angles(.), n, eta) over the
/// eight angles with multi-start Nelder-Mead.  Start 0 is the fixed textbook
/// setting quad; starts 1.. are uniform random angle vectors drawn from a
/// stream derived from (cfg.seed, start index).  The minimum over starts wins,
/// ties going to the lowest start index.
OptimizationResult minimize_s_n(double v, int n, double eta, const OptimizerConfig& cfg);

struct SweepCell {
  OptimizationResult result;
  bool failed = false;
  std::string error;
};

/// One cell per (v, n) for n = 1..n_max, ordered by v then n as given.  With
/// `optimize` false every cell is evaluated at the fixed textbook settings.
/// A failing cell is marked and the sweep continues.
std::vector<SweepCell> sweep(const std::vector<double>& v_list, int n_max, double eta,
                             const OptimizerConfig& cfg, bool optimize = true);

enum class Parity { Odd, Even };

/// Scans n = 1, 3, 5, ... (or 2, 4, ...) until two consecutive n without a
/// violation, or until cfg.n_cap, and returns the last violating n (0 if none).
int violation_threshold(double v, Parity parity, const OptimizerConfig& cfg, double eta = 1.0);

}  // namespace bellint
