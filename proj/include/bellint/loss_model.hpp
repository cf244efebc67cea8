#pragma once

#include "bellint/aggregation.hpp"
#include "bellint/quantum_core.hpp"

namespace bellint {

/// Increment law of one pair when each photon is independently detected with
/// probability eta (heralded source, no dark counts):
///   both detected   eta^2          joint outcome law
///   Alice only      eta(1 - eta)   Alice's marginal, Bob's increment 0
///   Bob only        (1 - eta)eta   Bob's marginal, Alice's increment 0
///   neither         (1 - eta)^2    (0, 0)
/// Throws DomainError unless 0 <= eta <= 1.
IncrementLaw lossy_increment_law(const PairDistribution& pair, double eta);

/// S_N with detection efficiency eta; each party still outputs 0 iff it saw
/// strictly more detector-0 hits.
BellValue s_n_eta(const TwoQubitState& state, const SettingQuad& settings, int n, double eta);

struct EfficiencyResult {
  int n = 0;
  /// Critical efficiency: s_n_eta < 1 for every eta in (eta_min, 1].
  double eta_min = 0.0;
  /// Final bisection bracket, s >= 1 at `lower` and s < 1 at `upper`.
  double lower = 0.0;
  double upper = 1.0;
  int iterations = 0;
};

/// Critical detection efficiency for n pairs.  A downward scan from eta = 1 in
/// steps of 0.01 brackets the largest crossing of s = 1, then bisection
/// (at most 60 halvings) narrows it to `tol`.
/// Throws NoThresholdError when s_n_eta(.., 1) >= 1 and DomainError for
/// tol < 1e-10 or n < 1.
EfficiencyResult eta_min(const TwoQubitState& state, const SettingQuad& settings, int n,
                         double tol = 1e-10);

}  // namespace bellint
