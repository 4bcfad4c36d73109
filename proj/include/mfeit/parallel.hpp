#pragma once

#include <cstddef>
#include <functional>

namespace mfeit {

/// Worker count used by parallel_for; defaults to MFEIT_THREADS or 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index writes only its own slot, so results
/// do not depend on scheduling. The exception thrown by the lowest failing index
/// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace mfeit
