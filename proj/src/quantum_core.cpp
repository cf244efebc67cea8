#include "bellint/quantum_core.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "bellint/errors.hpp"

namespace bellint {
namespace {

using cd = std::complex<double>;

const Eigen::Matrix2cd& pauli(int axis) {
  static const std::array<Eigen::Matrix2cd, 3> sigma = [] {
    std::array<Eigen::Matrix2cd, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, cd(0, -1), cd(0, 1), 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  return sigma[axis];
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

TwoQubitState::TwoQubitState(const Eigen::Matrix4cd& rho) : rho_(rho) {
  if (!rho_.allFinite()) throw DomainError("state matrix has non-finite entries");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kValidityTol)
    throw DomainError("state matrix is not Hermitian");
  const cd tr = rho_.trace();
  if (std::abs(tr.real() - 1.0) > kValidityTol || std::abs(tr.imag()) > kValidityTol)
    throw DomainError("state trace is not 1");
  if (eigenvalues()(0) < -kValidityTol) throw DomainError("state is not positive semidefinite");
}

Eigen::Vector4d TwoQubitState::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

TwoQubitState werner_state(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const Eigen::Matrix4cd rho =
      v * (phi * phi.adjoint()) + (1.0 - v) * 0.25 * Eigen::Matrix4cd::Identity();
  return TwoQubitState(rho);
}

MeasurementSetting::MeasurementSetting(const Eigen::Vector3d& bloch) : bloch_(bloch) {
  if (!bloch_.allFinite() || std::abs(bloch_.norm() - 1.0) > kValidityTol)
    throw DomainError("Bloch vector must have unit norm");
}

Eigen::Matrix2cd MeasurementSetting::projector(int outcome) const {
  Eigen::Matrix2cd n_sigma = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 3; ++k) n_sigma += bloch_(k) * pauli(k);
  const Eigen::Matrix2cd one = Eigen::Matrix2cd::Identity();
  const Eigen::Matrix2cd pi1 = 0.5 * (one + n_sigma);
  return outcome == 1 ? pi1 : Eigen::Matrix2cd(one - pi1);
}

SettingQuad paper_settings() {
  const double r = 1.0 / std::sqrt(2.0);
  return {MeasurementSetting({-1.0, 0.0, 0.0}), MeasurementSetting({0.0, -1.0, 0.0}),
          MeasurementSetting({-r, -r, 0.0}), MeasurementSetting({-r, r, 0.0})};
}

double PairDistribution::operator()(int a, int b) const {
  if (a == 0) return b == 0 ? p00 : p01;
  return b == 0 ? p10 : p11;
}

PairDistribution PairDistribution::validated(double p00, double p01, double p10, double p11,
                                             double tol) {
  std::array<double, 4> p{p00, p01, p10, p11};
  double total = 0.0;
  for (double& x : p) {
    if (!std::isfinite(x) || x < -tol || x > 1.0 + tol)
      throw DomainError("probability out of range: " + std::to_string(x));
    if (x < 0.0) x = 0.0;
    total += x;
  }
  if (std::abs(total - 1.0) > tol) throw DomainError("probabilities do not sum to 1");
  return {p[0], p[1], p[2], p[3]};
}

PairDistribution pair_probabilities(const TwoQubitState& state, const MeasurementSetting& alice,
                                    const MeasurementSetting& bob) {
  std::array<double, 4> p{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Eigen::Matrix4cd effect = kron(alice.projector(a), bob.projector(b));
      p[2 * a + b] = (state.matrix() * effect).trace().real();
    }
  }
  return PairDistribution::validated(p[0], p[1], p[2], p[3]);
}

CorrelationTable::CorrelationTable(const std::array<std::array<PairDistribution, 2>, 2>& dist,
                                   double tol)
    : dist_(dist) {
  for (int x = 0; x < 2; ++x)
    if (std::abs(dist_[x][0].alice_marginal(0) - dist_[x][1].alice_marginal(0)) > tol)
      throw DomainError("Alice's marginal depends on Bob's setting");
  for (int y = 0; y < 2; ++y)
    if (std::abs(dist_[0][y].bob_marginal(0) - dist_[1][y].bob_marginal(0)) > tol)
      throw DomainError("Bob's marginal depends on Alice's setting");
}

CorrelationTable correlation_table(const TwoQubitState& state, const SettingQuad& settings) {
  std::array<std::array<PairDistribution, 2>, 2> dist;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      dist[x][y] = pair_probabilities(state, settings[x], settings[2 + y]);
  return CorrelationTable(dist);
}

BellValue bell_functional(const CorrelationTable& table) {
  return {bell_expression([&](int a, int b, int x, int y) { return table(x, y)(a, b); })};
}

BellValue deterministic_strategy_value(int a1, int a2, int b1, int b2) {
  const std::array<int, 2> alice{a1, a2};
  const std::array<int, 2> bob{b1, b2};
  for (int bit : {a1, a2, b1, b2})
    if (bit != 0 && bit != 1) throw DomainError("deterministic outputs must be bits");
  return {bell_expression([&](int a, int b, int x, int y) {
    return (alice[x - 1] == a && bob[y - 1] == b) ? 1.0 : 0.0;
  })};
}

}  // namespace bellint
