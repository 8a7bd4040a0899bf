#pragma once

#include <cstddef>
#include <functional>

namespace wavesim {

/// Number of worker threads used by the internal kernels. Defaults to the
/// hardware concurrency. Results never depend on this value: every parallel
/// loop writes to pre-assigned indices and reductions are done in fixed order.
std::size_t worker_count();
void set_worker_count(std::size_t workers);

/// Runs body(i) for i in [begin, end), split into contiguous static chunks.
/// The first exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace wavesim
