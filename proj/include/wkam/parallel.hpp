#pragma once

// Minimal fork-join helper. Work is split into contiguous chunks so results
// never depend on the thread count.

#include <cstddef>
#include <functional>

namespace wkam {

/// Worker count used by parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(begin, end) on disjoint chunks covering [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace wkam
