#pragma once

#include <functional>

namespace corrview {

/// Caps the worker count used by parallel_for. 0 restores the hardware default.
void set_thread_cap(int n);

/// Worker count currently in effect (>= 1).
int effective_threads();

/// Runs fn(i) for i in [0, n). Work is chunked across threads; fn must only
/// write state owned by index i so results do not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace corrview
