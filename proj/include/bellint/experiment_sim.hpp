#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bellint/quantum_core.hpp"
#include "bellint/random.hpp"

namespace bellint {

/// Largest matrix accepted by count_perfect_matchings().
inline constexpr int kMaxMatchingSize = 15;

struct ExperimentConfig {
  int n = 3;          ///< pairs per run
  double v = 1.0;     ///< visibility of the emitted Werner pairs
  double eta = 1.0;   ///< per-photon detection efficiency
  double tau = 1.0;   ///< emission period
  /// Extra flight time of each of Alice's paths, in units of tau.
  std::vector<int> path_delays{6, 7, 8, 9, 10};
  std::int64_t runs = 100000;
  std::uint64_t seed = 1;
  SettingQuad settings = paper_settings();
  /// Keep only runs whose arrival pattern leaves the pairing ambiguous.
  bool ambiguity_required = true;

  /// Throws DomainError on n < 1, runs < 1, v/eta outside [0,1], tau <= 0,
  /// empty/duplicate/negative delays, or n > 15 with ambiguity required.
  void validate() const;
};

/// One emitted pair.  Outcomes are sampled for every pair; a lost photon
/// simply leaves no hit.
struct PairEvent {
  int a = 0;
  int b = 0;
  bool alice_detected = true;
  bool bob_detected = true;
  int alice_delay = 0;  ///< chosen path, units of tau
};

/// Settings, outputs and postselection verdict of a run.
struct RunOutcome {
  int x = 1;
  int y = 1;
  int a = 1;
  int b = 1;
  bool kept = false;
};

struct RunRecord {
  std::int64_t index = 0;
  std::vector<PairEvent> pairs;
  /// Arrival times t0 + k tau (+ delay tau for Alice) of detected photons,
  /// split by detector: hits[outcome] in emission order.  t0 = 0.
  std::array<std::vector<double>, 2> alice_hits;
  std::array<std::vector<double>, 2> bob_hits;
  /// Number of photon-to-emission-slot assignments consistent with Alice's
  /// arrival times (0 unless all n photons were detected).
  std::int64_t matchings = 0;
  RunOutcome outcome;

  std::vector<double> alice_arrivals() const;  ///< sorted
  std::vector<double> bob_arrivals() const;    ///< sorted
};

/// Permanent of a 0/1 matrix given as row bitmasks (bit k of rows[i] set when
/// row i is compatible with column k), by Ryser's inclusion-exclusion.
/// Throws SizeError above kMaxMatchingSize.
std::int64_t count_perfect_matchings(std::span<const std::uint32_t> rows);
std::int64_t count_perfect_matchings(const std::vector<std::vector<bool>>& compat);

/// Compatibility of Alice's arrival slots with emission slots 0..n-1:
/// bit k of row i is set iff arrival_slots[i] - k is one of `delays`.
std::vector<std::uint32_t> arrival_compatibility(std::span<const int> arrival_slots, int n,
                                                 std::span<const int> delays);

/// Pairing is ambiguous when the arrival slots are pairwise distinct and admit
/// at least two perfect matchings onto the n emission slots.
bool pairing_ambiguous(std::span<const int> arrival_slots, int n, std::span<const int> delays);

/// Simulates one run: uniform settings, n Born-rule pairs, independent loss,
/// uniform path choice for Alice's photons, postselection (all n photons on
/// both sides, plus ambiguity if required) and majority outputs (ties -> 1).
RunRecord simulate_run(const ExperimentConfig& cfg, RandomStream& stream, std::int64_t index = 0);

/// Runs cfg.runs experiments, run i drawing from stream (cfg.seed, i).  Runs
/// are simulated in parallel blocks, but `sink` (if given) sees every record
/// in run order and the returned outcomes are in run order.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg,
                                       const std::function<void(const RunRecord&)>& sink = {});

struct EstimateReport {
  double s_hat = 0.0;
  double stderr_ = 0.0;
  std::int64_t kept_runs = 0;
  std::int64_t total_runs = 0;
  double postselection_rate = 0.0;
  /// Plug-in p_N(ab|xy), keyed "p<ab>|<xy>" (e.g. "p01|22").
  std::map<std::string, double> terms;
  /// Kept runs per setting pair, keyed "<xy>".
  std::map<std::string, std::int64_t> kept_by_setting;
  int bootstrap_b = 0;
};

/// Plug-in estimate of S_N over kept runs with a nonparametric bootstrap
/// standard error (B resamples of the kept runs, seeded).  B = 1 gives
/// stderr 0.  Throws InsufficientDataError when a setting pair has no kept run.
EstimateReport estimate_s(std::span<const RunOutcome> runs, int bootstrap_b, std::uint64_t seed);
EstimateReport estimate_s(std::span<const RunRecord> records, int bootstrap_b, std::uint64_t seed);

/// Single-line JSON for the run log: index, settings, outputs, kept flag,
/// arrival times and the matching count.
std::string run_log_line(const RunRecord& record);

/// Summary object with every EstimateReport field.
std::string report_json(const EstimateReport& report, const ExperimentConfig& cfg);

}  // namespace bellint
