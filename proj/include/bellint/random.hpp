#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace bellint {

/// Random stream keyed by (master seed, purpose, index).  Streams with
/// different keys are independent for practical purposes, and the sequence a
/// key produces does not depend on which thread consumes it.
class RandomStream {
 public:
  /// Purpose tags keep e.g. optimizer start 3 and simulation run 3 apart.
  enum class Purpose : std::uint32_t { OptimizerStart = 1, SimulationRun = 2, Bootstrap = 3 };

  RandomStream(std::uint64_t master_seed, Purpose purpose, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bellint
