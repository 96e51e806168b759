// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace sepsr {

// Worker cap: SEPSR_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
[[nodiscard]] std::size_t worker_count();

// Runs fn(0..n-1) on up to `workers` threads (0 means worker_count()).
// The first exception thrown by any task is rethrown after all finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t workers = 0);

} // namespace sepsr
