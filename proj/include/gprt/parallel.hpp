#pragma once

#include <cstdint>
#include <functional>

namespace gprt {

// Worker cap for all parallel loops. 0 = hardware concurrency.
// Resolution order: explicit set_thread_count() > GPRT_THREADS env > hardware.
void set_thread_count(int n);
int thread_count();

// Runs fn(begin..end) split into contiguous chunks, one per worker.
// The chunk boundaries depend only on (end - begin) and the worker count,
// never on scheduling, so any per-chunk output written to disjoint slots
// is deterministic.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace gprt
