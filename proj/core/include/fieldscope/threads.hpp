#pragma once

#include <cstddef>
#include <functional>

namespace fieldscope {

/// Worker count for data-parallel loops: FIELDSCOPE_THREADS if set (min 1),
/// otherwise hardware concurrency capped at 8.
int thread_count();

/// Runs fn(i) for i in [0, n). Work is split across workers but each index
/// writes only its own output slot, so results never depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fieldscope
