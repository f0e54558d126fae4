#pragma once

#include <cstddef>
#include <functional>

namespace redistrict {

/// Number of worker threads used when callers pass 0.
unsigned default_thread_count();

/// Runs body(i) for i in [0, n) over `threads` workers in contiguous chunks.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace redistrict
