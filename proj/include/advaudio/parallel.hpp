#pragma once

#include <cstddef>
#include <functional>

namespace advaudio {

// Worker count: min(hardware_concurrency, ADVAUDIO_THREADS) with a floor of 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n). Indices are split into contiguous static
// chunks, one per worker, so the assignment of index to worker is a pure
// function of (n, worker_count). Each index must write only its own slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace advaudio
