#include "bellint/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "bellint/errors.hpp"
#include "bellint/parallel.hpp"

namespace bellint {
namespace {

// Far tails of the count-difference law sink below the smallest normal double
// for large n; arithmetic on subnormals is very slow on x86.  Flushing them to
// zero changes no value above 2.2e-308.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned int saved_;
#endif
};

// Zero-padded square buffer.  Cell (i, j) of the current lattice lives at
// (i + pad, j + pad), so stencil reads just outside the support hit zeros.
class PaddedGrid {
 public:
  PaddedGrid(int capacity, int pad)
      : pad_(pad), stride_(capacity + 2 * pad),
        data_(static_cast<std::size_t>(stride_) * stride_, 0.0) {}

  double* row(int i) { return data_.data() + static_cast<std::size_t>(i + pad_) * stride_ + pad_; }
  const double* row(int i) const {
    return data_.data() + static_cast<std::size_t>(i + pad_) * stride_ + pad_;
  }

 private:
  int pad_;
  int stride_;
  std::vector<double> data_;
};

// D_A and D_B change by +-1 every step, so after k steps they sit on
// d = -k + 2i, i in [0, k].  Moving to k+1 maps old index i to i+1 for a +1
// increment and to i for a -1 increment.
DifferenceDistribution convolve_parity(const IncrementLaw& law, int n) {
  const FlushDenormals ftz;
  const double pp = law.at(1, 1), pm = law.at(1, -1), mp = law.at(-1, 1), mm = law.at(-1, -1);
  PaddedGrid cur(n + 1, 1), next(n + 1, 1);
  cur.row(0)[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i <= k + 1; ++i) {
      const double* up = cur.row(i - 1);
      const double* here = cur.row(i);
      double* out = next.row(i);
      for (int j = 0; j <= k + 1; ++j)
        out[j] = pp * up[j - 1] + pm * up[j] + mp * here[j - 1] + mm * here[j];
    }
    std::swap(cur, next);
  }
  std::vector<double> grid(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) grid[static_cast<std::size_t>(i) * (n + 1) + j] = cur.row(i)[j];
  return DifferenceDistribution(n, 2, std::move(grid));
}

// General three-valued increments; after k steps d = -k + i, i in [0, 2k].
// Old index i maps to i + 1 + delta.
DifferenceDistribution convolve_full(const IncrementLaw& law, int n) {
  const FlushDenormals ftz;
  const int m = 2 * n + 1;
  PaddedGrid cur(m, 2), next(m, 2);
  cur.row(0)[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    const int size = 2 * k + 3;
    for (int i = 0; i < size; ++i) {
      double* out = next.row(i);
      for (int j = 0; j < size; ++j) out[j] = 0.0;
      for (int da = -1; da <= 1; ++da) {
        const double* src = cur.row(i - 1 - da);
        for (int db = -1; db <= 1; ++db) {
          const double w = law.at(da, db);
          if (w == 0.0) continue;
          const double* s = src - 1 - db;
          for (int j = 0; j < size; ++j) out[j] += w * s[j];
        }
      }
    }
    std::swap(cur, next);
  }
  std::vector<double> grid(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) grid[static_cast<std::size_t>(i) * m + j] = cur.row(i)[j];
  return DifferenceDistribution(n, 1, std::move(grid));
}

}  // namespace

double IncrementLaw::sum() const {
  double total = 0.0;
  for (const auto& r : prob)
    for (double p : r) total += p;
  return total;
}

bool IncrementLaw::has_zero_increments() const {
  for (int d = -1; d <= 1; ++d)
    if (at(0, d) != 0.0 || at(d, 0) != 0.0) return true;
  return false;
}

IncrementLaw IncrementLaw::lossless(const PairDistribution& pair) {
  IncrementLaw law;
  law.at(1, 1) = pair.p00;
  law.at(1, -1) = pair.p01;
  law.at(-1, 1) = pair.p10;
  law.at(-1, -1) = pair.p11;
  return law;
}

DifferenceDistribution::DifferenceDistribution(int n, int step, std::vector<double> grid)
    : n_(n), step_(step), size_(2 * n / step + 1), grid_(std::move(grid)) {}

double DifferenceDistribution::at(int d_a, int d_b) const {
  if (std::abs(d_a) > n_ || std::abs(d_b) > n_) return 0.0;
  const int oa = d_a + n_, ob = d_b + n_;
  if (oa % step_ != 0 || ob % step_ != 0) return 0.0;
  return cell(oa / step_, ob / step_);
}

double DifferenceDistribution::total_mass() const {
  double total = 0.0;
  for (double p : grid_) total += p;
  return total;
}

DifferenceDistribution difference_distribution(const IncrementLaw& law, int n, LatticeMode mode) {
  if (n < 1) throw DomainError("pair count must be at least 1");
  if (mode == LatticeMode::Auto && !law.has_zero_increments()) return convolve_parity(law, n);
  return convolve_full(law, n);
}

DifferenceDistribution difference_distribution(const PairDistribution& pair, int n) {
  return difference_distribution(IncrementLaw::lossless(pair), n);
}

double AggregatedDistribution::operator()(int a, int b) const {
  if (a == 0) return b == 0 ? p00 : p01;
  return b == 0 ? p10 : p11;
}

AggregatedDistribution majority_probabilities(const DifferenceDistribution& diff) {
  // q[a][b] accumulates the cells where Alice outputs a and Bob outputs b.
  double q[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  const int size = diff.lattice_size();
  for (int i = 0; i < size; ++i) {
    const int a = diff.coordinate(i) > 0 ? 0 : 1;
    for (int j = 0; j < size; ++j) {
      const int b = diff.coordinate(j) > 0 ? 0 : 1;
      q[a][b] += diff.cell(i, j);
    }
  }
  return {q[0][0], q[0][1], q[1][0], q[1][1]};
}

AggregatedDistribution brute_force_p_n(const PairDistribution& pair, int n) {
  if (n < 1 || n > 8) throw DomainError("brute force enumeration needs 1 <= n <= 8");
  double q[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  const long strings = 1L << (2 * n);
  for (long code = 0; code < strings; ++code) {
    double weight = 1.0;
    int sum_a = 0, sum_b = 0;
    for (int k = 0; k < n; ++k) {
      const int a = static_cast<int>((code >> (2 * k + 1)) & 1);
      const int b = static_cast<int>((code >> (2 * k)) & 1);
      weight *= pair(a, b);
      sum_a += a;
      sum_b += b;
    }
    // sum < N/2 -> output 0, sum >= N/2 -> output 1
    const int out_a = 2 * sum_a < n ? 0 : 1;
    const int out_b = 2 * sum_b < n ? 0 : 1;
    q[out_a][out_b] += weight;
  }
  return {q[0][0], q[0][1], q[1][0], q[1][1]};
}

BellValue aggregated_bell_value(const IncrementTable& laws, int n) {
  if (n < 1) throw DomainError("pair count must be at least 1");
  std::array<AggregatedDistribution, 4> agg;
  parallel_for(4, [&](std::size_t idx) {
    agg[idx] = majority_probabilities(difference_distribution(laws[idx / 2][idx % 2], n));
  });
  return {bell_expression(
      [&](int a, int b, int x, int y) { return agg[2 * (x - 1) + (y - 1)](a, b); })};
}

BellValue s_n(const TwoQubitState& state, const SettingQuad& settings, int n) {
  IncrementTable laws;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      laws[x][y] = IncrementLaw::lossless(pair_probabilities(state, settings[x], settings[2 + y]));
  return aggregated_bell_value(laws, n);
}

BellValue asymptotic_s(const TwoQubitState& state, const SettingQuad& settings) {
  constexpr double kMarginalTol = 1e-9;
  std::array<std::array<double, 2>, 2> arcsine{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const PairDistribution p = pair_probabilities(state, settings[x], settings[2 + y]);
      if (std::abs(p.alice_marginal(0) - 0.5) > kMarginalTol ||
          std::abs(p.bob_marginal(0) - 0.5) > kMarginalTol)
        throw UnsupportedRegimeError("asymptotic limit requires unbiased marginals");
      const double rho = std::clamp(p.correlator(), -1.0, 1.0);
      arcsine[x][y] = std::asin(rho) / (2.0 * std::numbers::pi);
    }
  }
  return {bell_expression([&](int a, int b, int x, int y) {
    const double t = arcsine[x - 1][y - 1];
    return a == b ? 0.25 + t : 0.25 - t;
  })};
}

}  // namespace bellint
