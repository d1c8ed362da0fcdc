// Minimal deterministic worker pool for independent sweep cells.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace qrwt {

/// Thread count from an explicit request, else the QRWT_THREADS environment
/// variable, else 1.  Throws std::invalid_argument for values below 1.
int resolve_threads(std::optional<int> requested);

/// Calls body(i) for i in [0, n) on up to `threads` threads.  Each index runs
/// exactly once; results must be written to per-index slots.  The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace qrwt
