#pragma once

#include <cstddef>
#include <functional>

namespace ember {

// Caps worker parallelism for every parallel_for issued afterwards.
// n <= 0 restores the default (all hardware threads).
void set_thread_limit(int n);

// Runs body(begin, end) over disjoint chunks of [0, count). Chunks may run
// concurrently; bodies must only write state owned by their own range.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ember
