#include "otkit/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace otkit {

namespace {

constexpr std::size_t kInlineWork = 1 << 15;

std::size_t read_budget() {
  std::size_t budget = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OTKIT_THREADS")) {
    try {
      const long requested = std::stol(env);
      if (requested >= 1) budget = static_cast<std::size_t>(requested);
    } catch (const std::exception&) {
      // unparsable value: keep the default
    }
  }
  return budget;
}

}  // namespace

std::size_t thread_budget() {
  static const std::size_t budget = read_budget();
  return budget;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t cost_hint) {
  const std::size_t threads = std::min(thread_budget(), n);
  if (threads <= 1 || n * std::max<std::size_t>(cost_hint, 1) < kInlineWork) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + threads - 1) / threads;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace otkit
