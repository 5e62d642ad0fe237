#pragma once

#include <cstddef>
#include <functional>

namespace qlab {

// Runs fn(i) for i in [0, n) on up to `jobs` threads (jobs <= 0 means
// hardware concurrency). Callers key any randomness on i so results do not
// depend on the schedule. The first exception thrown is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace qlab
