#pragma once

#include <cstddef>
#include <functional>

namespace countflow {

// Worker count actually used: `requested` (0 = hardware concurrency),
// capped by the COUNTFLOW_WORKERS environment variable when set.
std::size_t effective_workers(std::size_t requested = 0);

// Runs fn(0), ..., fn(count - 1) across `workers` threads. Job index
// determines all randomness on the caller's side, so scheduling cannot
// change results. The first exception thrown by a job is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace countflow
