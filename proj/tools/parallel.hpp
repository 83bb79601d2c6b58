#pragma once

#include <cstddef>
#include <functional>

namespace sadyn::cli {

/// Worker count from SA_DYN_THREADS (unset or invalid: hardware concurrency,
/// at least 1).
unsigned worker_count();

/// Calls body(k) for k in [0, n) on up to worker_count() threads. Callers
/// write results into slot k, so output order never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sadyn::cli
