#pragma once

#include <cstddef>
#include <functional>

namespace noregret {

// 0 means one worker per hardware thread.
std::size_t resolve_workers(std::size_t requested);

// Calls fn(i) for i in [0, n) across `workers` threads using contiguous
// chunks. Results must not depend on scheduling: fn should write only to
// slot i and seed any randomness from i. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace noregret
