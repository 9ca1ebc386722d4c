#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace popowicz {

inline constexpr std::string_view kWorkersEnv = "POPOWICZ_WORKERS";

/// Worker count from POPOWICZ_WORKERS, else the hardware concurrency (>= 1).
/// Throws InvalidInput when the variable is set but not an integer >= 1.
std::size_t worker_count();

/// Calls task(i) for i in [0, count) on up to `workers` threads and waits for
/// all of them. The first exception thrown by a task is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace popowicz
