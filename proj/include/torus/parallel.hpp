#pragma once

#include <cstddef>
#include <functional>

namespace torus {

// worker count: hardware concurrency capped by TORUS_THREADS
int worker_count();

// runs body(i) for i in [0, n); results must be written to per-index slots
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace torus
