#pragma once

#include <cstddef>
#include <functional>

namespace superdiff {

/// Worker count: SUPERDIFF_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. After all
/// workers join, the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace superdiff
