#pragma once

#include <cstddef>
#include <functional>

#include "agenteval/errors.hpp"

namespace agenteval {

class Cancelled : public Error {
 public:
  Cancelled() : Error("cancelled") {}
};

// Process-wide cancellation flag (set from the SIGINT handler).
void request_cancel() noexcept;
bool cancel_requested() noexcept;
void reset_cancel() noexcept;

// Runs fn(i) for i in [0, count) on at most `parallelism` threads. No new task
// starts after a failure or cancellation; the first exception is rethrown once
// in-flight tasks have drained.
void parallel_for(std::size_t count, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace agenteval
