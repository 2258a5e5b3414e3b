#pragma once

#include <cstddef>
#include <functional>

namespace asep {

/// Runs fn(i) for every i in [0, count) on up to `threads` workers (strided
/// assignment). After all workers finish, the exception thrown for the lowest
/// index, if any, is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// ASEP_LAB_THREADS if set to a positive integer, otherwise 1.
int default_thread_count();

}  // namespace asep
