#pragma once

#include <cstddef>
#include <functional>

namespace tsfeat {

/// Caps the number of worker threads used by parallel_for. Zero restores the
/// default (hardware concurrency).
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for every i in [0, n). Each index is processed exactly once;
/// callers write results into per-index slots so that output never depends
/// on scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tsfeat
