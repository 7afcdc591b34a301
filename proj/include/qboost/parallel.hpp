#pragma once

#include <cstddef>
#include <functional>

namespace qboost {

// Worker count: hardware concurrency, capped by QBOOST_THREADS when set.
std::size_t thread_budget();

// Runs body(k) for k in [0, count) on up to `threads` workers (0 = budget).
// If bodies throw, the exception of the lowest index is rethrown after all
// workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace qboost
