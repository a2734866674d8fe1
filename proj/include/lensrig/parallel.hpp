#pragma once

#include <cstddef>
#include <functional>

namespace lensrig {

// Upper bound on worker threads used by parallel_for (>= 1). Defaults to the
// hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Calls fn(i) for i in [0, n). Results must be written by index so the outcome
// does not depend on scheduling. The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lensrig
