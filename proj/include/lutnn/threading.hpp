// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace lutnn {

// Process-wide worker count for parallel_for. 1 = run inline.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks, one worker each. Results must not
// depend on chunk boundaries: workers may only write disjoint state. Keeping
// reductions out of here is what makes runs independent of the thread count.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& chunk);

}  // namespace lutnn
