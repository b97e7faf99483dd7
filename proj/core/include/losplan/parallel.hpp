#pragma once

#include <cstddef>
#include <functional>

namespace losplan {

/// Worker count: explicit value if > 0, else LOS_PLANNER_THREADS, else hardware concurrency.
int resolve_thread_count(int requested);

/// Runs body(k) for k in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; callers write results by index, so output does not
/// depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace losplan
