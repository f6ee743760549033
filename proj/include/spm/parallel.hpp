#pragma once

#include <cstddef>
#include <functional>

namespace spm {

// Worker count from SPM_THREADS, else the hardware concurrency (at least 1).
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() threads. Work is handed out by
// an atomic counter, so callers must write results into per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spm
