#pragma once

#include <cstddef>
#include <functional>

namespace homsim {

/// Worker count used by data-parallel loops. 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for i in [0, n) across the configured worker threads. Each
/// index is processed exactly once and must write only to its own output
/// slot, so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace homsim
