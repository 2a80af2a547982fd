#pragma once

#include <cstddef>
#include <functional>

namespace repeval {

/// Runs fn(i) for i in [0, count) on `workers` threads.
///
/// Tasks must write only to their own output slot; the caller aggregates
/// afterwards in index order, so results never depend on the worker count.
/// If any task throws, the exception of the lowest task index is rethrown
/// after all threads join (also independent of scheduling).
void run_indexed(std::size_t count, unsigned workers,
                 const std::function<void(std::size_t)>& fn);

/// Worker count from the environment (REPEVAL_WORKERS), defaulting to 1.
unsigned default_workers();

}  // namespace repeval
