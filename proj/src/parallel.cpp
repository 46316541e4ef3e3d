#include "agenteval/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace agenteval {

namespace {
std::atomic<bool> g_cancel{false};
}

void request_cancel() noexcept { g_cancel = true; }
bool cancel_requested() noexcept { return g_cancel; }
void reset_cancel() noexcept { g_cancel = false; }

void parallel_for(std::size_t count, std::size_t parallelism, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (stop || cancel_requested()) return;
      const std::size_t i = next++;
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, count);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  if (cancel_requested() && next < count) throw Cancelled();
}

}  // namespace agenteval
