#pragma once

#include <cstddef>
#include <functional>

namespace homsense {

// Worker count: hardware concurrency, optionally capped by HOMSENSE_THREADS.
unsigned worker_count();

// Runs body(i) for i in [0, n) over a static partition of worker threads.
// Exceptions thrown by any body are rethrown (first one wins) after join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace homsense
