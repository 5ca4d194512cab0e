#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace symchaos {

/// Per-task seed: a splitmix64 mix of (seed, index). Independent of the
/// number of workers, so serial and parallel runs agree.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Worker count for a `threads` setting: 0 means available parallelism.
unsigned resolve_threads(unsigned requested);

/// Runs task(i) for i in [0, n) on `threads` workers (0 = available
/// parallelism). Tasks must write only to their own slot. The first
/// exception thrown by a task is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace symchaos
