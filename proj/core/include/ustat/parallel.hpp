#pragma once

#include <cstddef>
#include <functional>

namespace ustat {

/// Process-wide worker count used when a call does not pass one explicitly.
/// Zero means "use USTAT_THREADS, else hardware concurrency".
void set_default_threads(unsigned threads);
[[nodiscard]] unsigned default_threads();

/// Resolve an explicit request (0 = default) to a positive worker count.
[[nodiscard]] unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, count). Work is handed out dynamically, so every
/// caller must write results into per-index slots and reduce them afterwards
/// in index order; that is what keeps results identical across thread counts.
/// Nested calls from inside a worker run serially.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace ustat
