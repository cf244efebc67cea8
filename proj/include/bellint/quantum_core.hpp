#pragma once

#include <array>
#include <Eigen/Dense>

namespace bellint {

/// Tolerance used for every physical-validity check on states, settings and
/// probability tables.
inline constexpr double kValidityTol = 1e-12;

/// Density matrix of a two-qubit system in the |00>,|01>,|10>,|11> basis
/// (Alice is the left tensor factor).
///
/// Construction validates hermiticity, unit trace and positivity; an invalid
/// matrix raises DomainError.  Instances are immutable.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Eigen::Matrix4cd& rho);

  const Eigen::Matrix4cd& matrix() const { return rho_; }
  /// Eigenvalues in ascending order.
  Eigen::Vector4d eigenvalues() const;

 private:
  Eigen::Matrix4cd rho_;
};

/// V |phi+><phi+| + (1 - V) I/4.  Throws DomainError unless 0 <= v <= 1.
TwoQubitState werner_state(double v);

/// A projective qubit measurement.  The Bloch vector fixes the projector of
/// outcome 1, Pi_1 = (I + bloch . sigma) / 2, and Pi_0 = I - Pi_1.
class MeasurementSetting {
 public:
  explicit MeasurementSetting(const Eigen::Vector3d& bloch);

  const Eigen::Vector3d& bloch() const { return bloch_; }
  /// Projector for outcome 0 or 1.
  Eigen::Matrix2cd projector(int outcome) const;

 private:
  Eigen::Vector3d bloch_;
};

/// Alice's two settings followed by Bob's two settings: {A1, A2, B1, B2}.
using SettingQuad = std::array<MeasurementSetting, 4>;

/// A1 = (I - sx)/2, A2 = (I - sy)/2, B1 = (I - (sx+sy)/sqrt2)/2,
/// B2 = (I - (sx-sy)/sqrt2)/2 as outcome-1 projectors.
SettingQuad paper_settings();

/// Joint outcome probabilities p(ab|xy) for one setting pair.
struct PairDistribution {
  double p00 = 0.25;
  double p01 = 0.25;
  double p10 = 0.25;
  double p11 = 0.25;

  double operator()(int a, int b) const;
  double alice_marginal(int a) const { return a == 0 ? p00 + p01 : p10 + p11; }
  double bob_marginal(int b) const { return b == 0 ? p00 + p10 : p01 + p11; }
  double sum() const { return p00 + p01 + p10 + p11; }
  /// p00 + p11 - p01 - p10
  double correlator() const { return p00 + p11 - p01 - p10; }

  /// Checks every entry in [-tol, 1 + tol] and total mass 1 within tol,
  /// then clamps small negatives to zero.  Throws DomainError otherwise.
  static PairDistribution validated(double p00, double p01, double p10, double p11,
                                    double tol = kValidityTol);
};

/// Born rule: p(ab) = Tr[rho (Pi_a (x) Pi_b)].
PairDistribution pair_probabilities(const TwoQubitState& state,
                                    const MeasurementSetting& alice,
                                    const MeasurementSetting& bob);

/// dist(x, y) for x, y in {1, 2}.
class CorrelationTable {
 public:
  CorrelationTable() = default;
  /// Throws DomainError if the table signals (Alice's marginal depends on y or
  /// Bob's on x) beyond `tol`.
  CorrelationTable(const std::array<std::array<PairDistribution, 2>, 2>& dist,
                   double tol = kValidityTol);

  const PairDistribution& operator()(int x, int y) const { return dist_[x - 1][y - 1]; }

 private:
  std::array<std::array<PairDistribution, 2>, 2> dist_{};
};

CorrelationTable correlation_table(const TwoQubitState& state, const SettingQuad& settings);

/// Value of the six-term Bell expression.  Local models satisfy s >= 1.
struct BellValue {
  static constexpr double kClassicalBound = 1.0;
  double s = 0.0;

  bool violates(double margin = 0.0) const { return s < kClassicalBound - margin; }
};

/// p(01|22) + p(10|12) + p(01|11) + p(11|21) + p(10|21) + p(00|21), with
/// `p(a, b, x, y)` supplying the probabilities.  Shared by the single-pair and
/// the aggregated expressions so both use the same term list.
template <class Prob>
double bell_expression(Prob&& p) {
  return p(0, 1, 2, 2) + p(1, 0, 1, 2) + p(0, 1, 1, 1) + p(1, 1, 2, 1) + p(1, 0, 2, 1) +
         p(0, 0, 2, 1);
}

BellValue bell_functional(const CorrelationTable& table);

/// Bell value of the local deterministic strategy A_x = a_x, B_y = b_y.
BellValue deterministic_strategy_value(int a1, int a2, int b1, int b2);

}  // namespace bellint
