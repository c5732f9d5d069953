#pragma once

#include <cstddef>
#include <functional>

namespace angiokit::detail {

// Thread cap: ANGIOKIT_THREADS when set, otherwise hardware concurrency.
// An explicit override (set_max_threads) takes precedence; 0 clears it.
unsigned max_threads();
void set_max_threads(unsigned n);

// Runs body(i) for i in [0, n) over contiguous chunks. Callers only write to
// disjoint outputs, so results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace angiokit::detail
