#include "bellint/loss_model.hpp"

#include <cmath>

#include "bellint/errors.hpp"

namespace bellint {
namespace {

int increment_of(int outcome) { return outcome == 0 ? 1 : -1; }

}  // namespace

IncrementLaw lossy_increment_law(const PairDistribution& pair, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  const double both = eta * eta;
  const double one_side = eta * (1.0 - eta);
  IncrementLaw law;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) law.at(increment_of(a), increment_of(b)) += both * pair(a, b);
    law.at(increment_of(a), 0) += one_side * pair.alice_marginal(a);
    law.at(0, increment_of(a)) += one_side * pair.bob_marginal(a);
  }
  law.at(0, 0) += (1.0 - eta) * (1.0 - eta);
  return law;
}

BellValue s_n_eta(const TwoQubitState& state, const SettingQuad& settings, int n, double eta) {
  IncrementTable laws;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      laws[x][y] =
          lossy_increment_law(pair_probabilities(state, settings[x], settings[2 + y]), eta);
  return aggregated_bell_value(laws, n);
}

EfficiencyResult eta_min(const TwoQubitState& state, const SettingQuad& settings, int n,
                         double tol) {
  constexpr double kScanStep = 0.01;
  constexpr int kMaxBisections = 60;
  if (n < 1) throw DomainError("pair count must be at least 1");
  if (!(tol >= 1e-10)) throw DomainError("tolerance must be at least 1e-10");

  auto value = [&](double eta) { return s_n_eta(state, settings, n, eta).s; };
  if (value(1.0) >= BellValue::kClassicalBound)
    throw NoThresholdError("no violation at perfect detection for n = " + std::to_string(n));

  EfficiencyResult result;
  result.n = n;
  double upper = 1.0;
  double lower = 1.0;
  for (int step = 1;; ++step) {
    lower = std::max(0.0, 1.0 - step * kScanStep);
    if (value(lower) >= BellValue::kClassicalBound) break;
    upper = lower;
    // s(0) = 1 always, so the scan ends at the latest at eta = 0.
    if (lower == 0.0) break;
  }

  int it = 0;
  while (upper - lower > tol && it < kMaxBisections) {
    const double mid = 0.5 * (lower + upper);
    if (value(mid) < BellValue::kClassicalBound)
      upper = mid;
    else
      lower = mid;
    ++it;
  }
  result.lower = lower;
  result.upper = upper;
  result.eta_min = 0.5 * (lower + upper);
  result.iterations = it;
  return result;
}

}  // namespace bellint
