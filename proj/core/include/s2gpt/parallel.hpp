#pragma once

#include <cstddef>
#include <functional>

namespace s2gpt {

/// Thread cap from S2GPT_THREADS, or `fallback` when unset or invalid.
std::size_t env_thread_cap(std::size_t fallback = 1);

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks are
/// handed out dynamically; callers write results into per-index slots so the
/// outcome is independent of scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace s2gpt
