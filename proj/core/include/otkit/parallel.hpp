#pragma once

#include <cstddef>
#include <functional>

namespace otkit {

/// Number of worker threads the library may use. Reads OTKIT_THREADS once;
/// defaults to the hardware concurrency.
std::size_t thread_budget();

/// Calls body(i) for i in [0, n). Indices are split into contiguous chunks
/// across at most thread_budget() threads. Each index is processed by exactly
/// one call, so results never depend on the thread count. Small loops
/// (n * cost_hint below an internal threshold) run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t cost_hint = 1);

}  // namespace otkit
