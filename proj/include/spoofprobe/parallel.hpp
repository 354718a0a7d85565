#pragma once

#include <cstddef>
#include <functional>

namespace spoofprobe {

// Worker cap: SPOOFPROBE_MAX_WORKERS if set and positive, else hardware
// concurrency (at least 1).
std::size_t max_workers();

// Runs body(i) for i in [0, n). Each index is processed exactly once; the
// first exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spoofprobe
