#pragma once

#include <cstddef>
#include <functional>

namespace spadsim {

/// jobs > 0 is taken literally; jobs <= 0 resolves to the hardware thread
/// count (at least 1).
int resolve_jobs(int jobs);

/// Runs body(begin, end) over a static contiguous partition of [0, count).
/// Workers must write to disjoint state. The first worker exception (by
/// worker index) is rethrown after all threads join, so the partition makes
/// error selection deterministic too.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace spadsim
