#pragma once

#include <cstddef>
#include <functional>

namespace sdfplan {

/// Threads used by parallel_for; 0 means the runtime default.
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs; the
/// result is then independent of the thread count.
void parallel_for(std::ptrdiff_t n, const std::function<void(std::ptrdiff_t)>& body);

}  // namespace sdfplan
