#pragma once

#include <cstddef>
#include <functional>

namespace bellint {

/// Worker cap: BELLINT_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads.  Work is
/// handed out by index, so results written to per-index slots do not depend
/// on scheduling.  If any call throws, the exception of the lowest failing
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bellint
