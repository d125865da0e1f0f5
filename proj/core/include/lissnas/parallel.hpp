#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace lissnas {

// Process-wide worker count used by the parallel primitives. Results never
// depend on it: work items draw from per-item random substreams and write to
// pre-sized slots.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Exceptions are rethrown for the lowest failing index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lissnas
