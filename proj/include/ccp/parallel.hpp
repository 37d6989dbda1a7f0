#pragma once

#include <cstddef>
#include <functional>

namespace ccp {

/// Caps the number of worker threads used by library fan-outs. Zero selects
/// the hardware concurrency. Results never depend on this value.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs task(i) for i in [0, n). Tasks must write only to slots they own;
/// the first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

} // namespace ccp
