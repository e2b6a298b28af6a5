#pragma once

#include <cstddef>
#include <functional>

namespace nlayers {

// Worker count: hardware concurrency capped by NEUMANN_LAYERS_THREADS when set.
unsigned worker_count();

// Runs body(i) for i in [0, n). The first exception thrown by a body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nlayers
