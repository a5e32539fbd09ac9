#pragma once

#include <cstddef>
#include <functional>

namespace echoforge {

/// Worker count: ECHOFORGE_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Keeps freed blocks up to 32 MiB in the heap instead of returning them to
/// the OS. glibc only; a no-op elsewhere.
void retain_freed_memory();

/// Runs body(i) for i in [0, n). Each index writes only its own output slot,
/// so results do not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace echoforge
