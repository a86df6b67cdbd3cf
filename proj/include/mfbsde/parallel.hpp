#pragma once

#include <cstddef>
#include <functional>

namespace mfbsde {

// Process-wide worker count used by parallel_for. Values < 1 are clamped to 1.
void set_thread_count(int threads);
int thread_count();

// Runs body(begin, end) over a static partition of [0, n). Every index is
// visited exactly once; the partition only affects scheduling, so bodies
// that write to disjoint per-index slots give identical results for any
// thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mfbsde
