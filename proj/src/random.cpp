#include "bellint/random.hpp"

#include <limits>

namespace bellint {

RandomStream::RandomStream(std::uint64_t master_seed, Purpose purpose, std::uint64_t index) {
  // seed_seq's mixing is fully specified, so the resulting engine state is the
  // same on every conforming standard library.
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  engine_.seed(seq);
}

std::size_t RandomStream::below(std::size_t n) {
  // Rejection sampling removes the modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

}  // namespace bellint
