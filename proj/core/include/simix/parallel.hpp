#pragma once

#include <cstddef>
#include <functional>

namespace simix {

// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware
// concurrency). Tasks must write results into caller-owned slots indexed by
// i so that aggregation is deterministic regardless of completion order.
// The first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

int effective_workers(int requested);

}  // namespace simix
