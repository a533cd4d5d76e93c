#pragma once

#include <cstddef>
#include <functional>

namespace grazing {

/// Worker count used by parallel_for. 1 means strictly serial.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is computed independently and
/// callers write into pre-sized slots, so results never depend on the
/// worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace grazing
