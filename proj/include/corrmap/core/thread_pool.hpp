#pragma once

#include <cstdint>
#include <functional>

namespace corrmap {

// Process-wide worker pool. parallel_for splits [0, n) into one contiguous
// chunk per worker; workers write disjoint output ranges only, so results do
// not depend on scheduling. Worker count honors CORRMAP_THREADS, defaulting
// to the hardware count (capped at 8).
int worker_count();

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace corrmap
