#pragma once

#include <cstddef>
#include <functional>

namespace prbm {

// Runs fn(0..count-1) on up to `threads` workers. Callers write into slot i, so the
// gathered output order never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// threads <= 0 means hardware concurrency.
int resolve_threads(int threads);

} // namespace prbm
