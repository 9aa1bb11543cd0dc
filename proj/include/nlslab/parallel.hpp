#pragma once

#include <cstddef>
#include <functional>

namespace nls {

// Worker count: NLSLAB_THREADS if set (>= 1), else hardware concurrency.
unsigned thread_budget();

// Runs body(i) for i in [0, count). Each index is independent, so results do
// not depend on the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace nls
