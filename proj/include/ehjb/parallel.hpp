#pragma once

#include <cstddef>
#include <functional>

namespace ehjb {

/// Effective worker count: explicit setting > ERGODIC_HJB_THREADS env var >
/// hardware concurrency. Values < 1 mean "auto".
int thread_count();

/// Override the worker count for this process (0 restores auto).
void set_thread_count(int n);

/// Static-partition parallel loop over [begin, end). The body must only
/// write to per-index slots: reductions are done by the caller afterwards in
/// fixed index order, so results are identical for any worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace ehjb
