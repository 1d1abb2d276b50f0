#pragma once

#include <cstddef>
#include <functional>

namespace scdgn {

/// Global cap on worker threads (the CLI's --threads flag). 1 = sequential.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(begin, end) over disjoint chunks of [0, n). Each index is handled
/// by exactly one worker, so results are deterministic regardless of the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace scdgn
