#include "bellint/experiment_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include <json.hpp>

#include "bellint/errors.hpp"
#include "bellint/parallel.hpp"

namespace bellint {
namespace {

constexpr std::int64_t kBlockSize = 1 << 16;

// Kept-run tallies: counts[cell_index(x, y, a, b)].
using CellCounts = std::array<std::int64_t, 16>;

int cell_index(int x, int y, int a, int b) { return ((x - 1) * 2 + (y - 1)) * 4 + a * 2 + b; }

std::string setting_key(int x, int y) { return std::to_string(x) + std::to_string(y); }

// Bell expression from cell counts; false if a setting pair is empty.
bool bell_from_counts(const CellCounts& counts, double& s) {
  std::array<std::int64_t, 4> totals{};
  for (int c = 0; c < 16; ++c) totals[c / 4] += counts[c];
  for (auto t : totals)
    if (t == 0) return false;
  s = bell_expression([&](int a, int b, int x, int y) {
    const int c = cell_index(x, y, a, b);
    return static_cast<double>(counts[c]) / static_cast<double>(totals[c / 4]);
  });
  return true;
}

int majority(const std::vector<double>& zero_hits, const std::vector<double>& one_hits) {
  return zero_hits.size() > one_hits.size() ? 0 : 1;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1) throw DomainError("pairs per run must be at least 1");
  if (runs < 1) throw DomainError("run count must be at least 1");
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("pulse period must be positive");
  if (path_delays.empty()) throw DomainError("at least one path delay is required");
  std::set<int> seen;
  for (int d : path_delays) {
    if (d < 0) throw DomainError("path delays must be nonnegative");
    if (!seen.insert(d).second) throw DomainError("path delays must be distinct");
  }
  if (ambiguity_required && n > kMaxMatchingSize)
    throw DomainError("ambiguity postselection supports at most 15 pairs");
}

std::vector<double> RunRecord::alice_arrivals() const {
  std::vector<double> t(alice_hits[0]);
  t.insert(t.end(), alice_hits[1].begin(), alice_hits[1].end());
  std::sort(t.begin(), t.end());
  return t;
}

std::vector<double> RunRecord::bob_arrivals() const {
  std::vector<double> t(bob_hits[0]);
  t.insert(t.end(), bob_hits[1].begin(), bob_hits[1].end());
  std::sort(t.begin(), t.end());
  return t;
}

std::int64_t count_perfect_matchings(std::span<const std::uint32_t> rows) {
  const int n = static_cast<int>(rows.size());
  if (n > kMaxMatchingSize) throw SizeError("matching count supports at most 15 rows");
  if (n == 0) return 1;
  for (std::uint32_t r : rows)
    if (r >> n) throw DomainError("compatibility matrix must be square");
  // Ryser: perm(A) = sum over column subsets S of (-1)^(n-|S|) prod_i |row_i & S|.
  __int128 total = 0;
  const std::uint32_t subsets = 1u << n;
  for (std::uint32_t cols = 1; cols < subsets; ++cols) {
    __int128 prod = 1;
    for (std::uint32_t r : rows) {
      const int hits = std::popcount(r & cols);
      if (hits == 0) {
        prod = 0;
        break;
      }
      prod *= hits;
    }
    if ((n - std::popcount(cols)) % 2 == 0)
      total += prod;
    else
      total -= prod;
  }
  return static_cast<std::int64_t>(total);
}

std::int64_t count_perfect_matchings(const std::vector<std::vector<bool>>& compat) {
  if (compat.size() > static_cast<std::size_t>(kMaxMatchingSize))
    throw SizeError("matching count supports at most 15 rows");
  std::vector<std::uint32_t> rows;
  rows.reserve(compat.size());
  for (const auto& row : compat) {
    if (row.size() != compat.size()) throw DomainError("compatibility matrix must be square");
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < row.size(); ++k)
      if (row[k]) mask |= 1u << k;
    rows.push_back(mask);
  }
  return count_perfect_matchings(rows);
}

std::vector<std::uint32_t> arrival_compatibility(std::span<const int> arrival_slots, int n,
                                                 std::span<const int> delays) {
  std::vector<std::uint32_t> rows;
  rows.reserve(arrival_slots.size());
  for (int slot : arrival_slots) {
    std::uint32_t mask = 0;
    for (int k = 0; k < n; ++k)
      if (std::find(delays.begin(), delays.end(), slot - k) != delays.end()) mask |= 1u << k;
    rows.push_back(mask);
  }
  return rows;
}

bool pairing_ambiguous(std::span<const int> arrival_slots, int n, std::span<const int> delays) {
  if (static_cast<int>(arrival_slots.size()) != n) return false;
  std::vector<int> sorted(arrival_slots.begin(), arrival_slots.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  return count_perfect_matchings(arrival_compatibility(sorted, n, delays)) >= 2;
}

static RunRecord simulate_with(const ExperimentConfig& cfg, const CorrelationTable& table,
                        RandomStream& stream, std::int64_t index) {
  RunRecord rec;
  rec.index = index;
  RunOutcome& out = rec.outcome;
  out.x = 1 + static_cast<int>(stream.below(2));
  out.y = 1 + static_cast<int>(stream.below(2));
  const PairDistribution& p = table(out.x, out.y);
  const std::array<double, 3> cumulative{p.p00, p.p00 + p.p01, p.p00 + p.p01 + p.p10};

  std::vector<int> alice_slots;
  rec.pairs.resize(static_cast<std::size_t>(cfg.n));
  for (int k = 0; k < cfg.n; ++k) {
    PairEvent& e = rec.pairs[static_cast<std::size_t>(k)];
    const double u = stream.uniform();
    const int joint = u < cumulative[0] ? 0 : u < cumulative[1] ? 1 : u < cumulative[2] ? 2 : 3;
    e.a = joint >> 1;
    e.b = joint & 1;
    e.alice_detected = stream.uniform() < cfg.eta;
    e.bob_detected = stream.uniform() < cfg.eta;
    e.alice_delay = cfg.path_delays[stream.below(cfg.path_delays.size())];
    if (e.alice_detected) {
      const int slot = k + e.alice_delay;
      alice_slots.push_back(slot);
      rec.alice_hits[e.a].push_back(cfg.tau * slot);
    }
    if (e.bob_detected) rec.bob_hits[e.b].push_back(cfg.tau * k);
  }

  const int alice_count = static_cast<int>(alice_slots.size());
  const int bob_count = static_cast<int>(rec.bob_hits[0].size() + rec.bob_hits[1].size());
  const bool complete = alice_count == cfg.n && bob_count == cfg.n;
  if (complete && cfg.n <= kMaxMatchingSize) {
    std::sort(alice_slots.begin(), alice_slots.end());
    rec.matchings = count_perfect_matchings(
        arrival_compatibility(alice_slots, cfg.n, cfg.path_delays));
  }
  out.kept = complete && (!cfg.ambiguity_required ||
                          pairing_ambiguous(alice_slots, cfg.n, cfg.path_delays));
  out.a = majority(rec.alice_hits[0], rec.alice_hits[1]);
  out.b = majority(rec.bob_hits[0], rec.bob_hits[1]);
  return rec;
}

RunRecord simulate_run(const ExperimentConfig& cfg, RandomStream& stream, std::int64_t index) {
  cfg.validate();
  return simulate_with(cfg, correlation_table(werner_state(cfg.v), cfg.settings), stream, index);
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg,
                                       const std::function<void(const RunRecord&)>& sink) {
  cfg.validate();
  const CorrelationTable table = correlation_table(werner_state(cfg.v), cfg.settings);
  std::vector<RunOutcome> outcomes(static_cast<std::size_t>(cfg.runs));
  std::vector<RunRecord> block;
  for (std::int64_t start = 0; start < cfg.runs; start += kBlockSize) {
    const std::int64_t count = std::min(kBlockSize, cfg.runs - start);
    if (sink) block.assign(static_cast<std::size_t>(count), RunRecord{});
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
      const std::int64_t index = start + static_cast<std::int64_t>(i);
      RandomStream stream(cfg.seed, RandomStream::Purpose::SimulationRun,
                          static_cast<std::uint64_t>(index));
      RunRecord rec = simulate_with(cfg, table, stream, index);
      outcomes[static_cast<std::size_t>(index)] = rec.outcome;
      if (sink) block[i] = std::move(rec);
    });
    if (sink)
      for (const RunRecord& rec : block) sink(rec);
  }
  return outcomes;
}

EstimateReport estimate_s(std::span<const RunOutcome> runs, int bootstrap_b, std::uint64_t seed) {
  if (bootstrap_b < 1) throw DomainError("bootstrap needs at least one resample");
  EstimateReport report;
  report.total_runs = static_cast<std::int64_t>(runs.size());
  report.bootstrap_b = bootstrap_b;

  CellCounts counts{};
  for (const RunOutcome& r : runs) {
    if (!r.kept) continue;
    ++counts[cell_index(r.x, r.y, r.a, r.b)];
    ++report.kept_runs;
  }
  for (int x = 1; x <= 2; ++x) {
    for (int y = 1; y <= 2; ++y) {
      std::int64_t total = 0;
      for (int c = 0; c < 4; ++c) total += counts[cell_index(x, y, 0, 0) + c];
      report.kept_by_setting[setting_key(x, y)] = total;
      if (total == 0)
        throw InsufficientDataError("no kept runs for settings (" + std::to_string(x) + "," +
                                    std::to_string(y) + ")");
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          report.terms["p" + std::to_string(a) + std::to_string(b) + "|" + setting_key(x, y)] =
              static_cast<double>(counts[cell_index(x, y, a, b)]) / static_cast<double>(total);
    }
  }
  bell_from_counts(counts, report.s_hat);
  report.postselection_rate = report.total_runs == 0
                                  ? 0.0
                                  : static_cast<double>(report.kept_runs) /
                                        static_cast<double>(report.total_runs);

  if (bootstrap_b == 1) return report;

  // Resampling K kept runs with replacement only matters through the 16 cell
  // counts, which are then multinomial(K, observed frequencies).  Drawing them
  // as a chain of binomials gives the same bootstrap law in O(16) per replicate.
  std::vector<double> replicate(static_cast<std::size_t>(bootstrap_b));
  std::vector<char> usable(replicate.size(), 0);
  parallel_for(replicate.size(), [&](std::size_t r) {
    RandomStream rng(seed, RandomStream::Purpose::Bootstrap, r);
    CellCounts draw{};
    std::int64_t remaining = report.kept_runs;
    std::int64_t mass_left = report.kept_runs;
    for (int c = 0; c < 16 && remaining > 0; ++c) {
      if (c == 15 || mass_left == counts[c]) {
        draw[c] = remaining;
        break;
      }
      const double p = static_cast<double>(counts[c]) / static_cast<double>(mass_left);
      std::binomial_distribution<std::int64_t> binom(remaining, std::clamp(p, 0.0, 1.0));
      draw[c] = binom(rng.engine());
      remaining -= draw[c];
      mass_left -= counts[c];
    }
    double s = 0.0;
    usable[r] = bell_from_counts(draw, s) ? 1 : 0;
    replicate[r] = s;
  });

  double mean = 0.0;
  int m = 0;
  for (std::size_t r = 0; r < replicate.size(); ++r)
    if (usable[r]) {
      mean += replicate[r];
      ++m;
    }
  if (m < 2) return report;
  mean /= m;
  double ss = 0.0;
  for (std::size_t r = 0; r < replicate.size(); ++r)
    if (usable[r]) ss += (replicate[r] - mean) * (replicate[r] - mean);
  report.stderr_ = std::sqrt(ss / (m - 1));
  return report;
}

EstimateReport estimate_s(std::span<const RunRecord> records, int bootstrap_b,
                          std::uint64_t seed) {
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(records.size());
  for (const RunRecord& r : records) outcomes.push_back(r.outcome);
  return estimate_s(outcomes, bootstrap_b, seed);
}

std::string run_log_line(const RunRecord& record) {
  nlohmann::ordered_json j;
  j["run"] = record.index;
  j["x"] = record.outcome.x;
  j["y"] = record.outcome.y;
  j["a"] = record.outcome.a;
  j["b"] = record.outcome.b;
  j["kept"] = record.outcome.kept;
  j["alice_arrivals"] = record.alice_arrivals();
  j["bob_arrivals"] = record.bob_arrivals();
  j["alice_hits"] = {record.alice_hits[0], record.alice_hits[1]};
  j["bob_hits"] = {record.bob_hits[0], record.bob_hits[1]};
  j["matchings"] = record.matchings;
  return j.dump();
}

std::string report_json(const EstimateReport& report, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["s_hat"] = report.s_hat;
  j["stderr"] = report.stderr_;
  j["kept_runs"] = report.kept_runs;
  j["total_runs"] = report.total_runs;
  j["postselection_rate"] = report.postselection_rate;
  j["bootstrap_b"] = report.bootstrap_b;
  j["terms"] = report.terms;
  j["kept_by_setting"] = report.kept_by_setting;
  nlohmann::ordered_json c;
  c["n"] = cfg.n;
  c["v"] = cfg.v;
  c["eta"] = cfg.eta;
  c["tau"] = cfg.tau;
  c["path_delays"] = cfg.path_delays;
  c["runs"] = cfg.runs;
  c["seed"] = cfg.seed;
  c["ambiguity_required"] = cfg.ambiguity_required;
  j["config"] = c;
  return j.dump(2);
}

}  // namespace bellint
