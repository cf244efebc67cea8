#pragma once

#include <array>
#include <vector>

#include "bellint/quantum_core.hpp"

namespace bellint {

/// Per-pair joint law of the count-difference increments (delta_A, delta_B),
/// each in {-1, 0, +1}: +1 is a hit in detector 0, -1 a hit in detector 1 and
/// 0 no detection.
struct IncrementLaw {
  /// prob[delta_a + 1][delta_b + 1]
  std::array<std::array<double, 3>, 3> prob{};

  double at(int delta_a, int delta_b) const { return prob[delta_a + 1][delta_b + 1]; }
  double& at(int delta_a, int delta_b) { return prob[delta_a + 1][delta_b + 1]; }
  double sum() const;
  /// True when some mass sits on a zero increment (a lost photon).
  bool has_zero_increments() const;

  /// Every pair is detected: (+1 if a = 0 else -1, +1 if b = 0 else -1).
  static IncrementLaw lossless(const PairDistribution& pair);
};

/// Joint law of D_A = N0_A - N1_A and D_B = N0_B - N1_B after n pairs.
///
/// Stored on a lattice d = -n + step * i.  When no increment can be zero the
/// differences share the parity of n and `step` is 2, so only (n+1)^2 cells
/// are kept; otherwise `step` is 1 and the grid is (2n+1)^2.
class DifferenceDistribution {
 public:
  DifferenceDistribution(int n, int step, std::vector<double> grid);

  int n() const { return n_; }
  int lattice_step() const { return step_; }
  int lattice_size() const { return size_; }
  /// P(D_A = d_a, D_B = d_b); zero off the lattice or outside [-n, n].
  double at(int d_a, int d_b) const;
  double total_mass() const;

  /// Value of lattice coordinate i.
  int coordinate(int i) const { return -n_ + step_ * i; }
  double cell(int i, int j) const { return grid_[static_cast<std::size_t>(i) * size_ + j]; }

 private:
  int n_;
  int step_;
  int size_;
  std::vector<double> grid_;
};

enum class LatticeMode {
  Auto,  ///< parity lattice when the law has no zero increments
  Full,  ///< always the (2n+1)^2 grid
};

/// n-fold convolution of `law`.  Throws DomainError for n < 1.
DifferenceDistribution difference_distribution(const IncrementLaw& law, int n,
                                               LatticeMode mode = LatticeMode::Auto);
DifferenceDistribution difference_distribution(const PairDistribution& pair, int n);

/// Coarse-grained outcome probabilities p_N(ab|xy).
struct AggregatedDistribution {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;

  double operator()(int a, int b) const;
  double sum() const { return p00 + p01 + p10 + p11; }
};

/// Each party outputs 0 iff its difference is strictly positive (I0 > I1);
/// ties, including no detection at all, give 1.
AggregatedDistribution majority_probabilities(const DifferenceDistribution& diff);

/// Literal sum over all 4^n outcome strings with output 0 iff sum(a_i) < n/2.
/// Only for 1 <= n <= 8; throws DomainError otherwise.
AggregatedDistribution brute_force_p_n(const PairDistribution& pair, int n);

/// Increment laws indexed [x-1][y-1].
using IncrementTable = std::array<std::array<IncrementLaw, 2>, 2>;

/// Bell expression of the majority-vote outputs after n pairs for the four
/// setting pairs.  The four convolutions are independent and may run
/// concurrently.
BellValue aggregated_bell_value(const IncrementTable& laws, int n);

/// S_N for `state` measured with `settings` and perfect detection.
BellValue s_n(const TwoQubitState& state, const SettingQuad& settings, int n);

/// N -> infinity limit via the bivariate-normal orthant law
/// P(D_A > 0, D_B > 0) -> 1/4 + asin(rho)/(2 pi).
/// Requires every marginal to be 1/2 within 1e-9 (UnsupportedRegimeError).
BellValue asymptotic_s(const TwoQubitState& state, const SettingQuad& settings);

}  // namespace bellint
