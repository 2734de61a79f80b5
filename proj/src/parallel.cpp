#include "ember/parallel.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <memory>
#include <mutex>

namespace ember {

namespace {

std::mutex g_limit_mutex;
std::unique_ptr<tbb::global_control> g_limit;

}  // namespace

void set_thread_limit(int n) {
  std::lock_guard lock(g_limit_mutex);
  g_limit.reset();
  if (n > 0)
    g_limit = std::make_unique<tbb::global_control>(
        tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n));
}

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count),
                    [&](const tbb::blocked_range<std::size_t>& r) { body(r.begin(), r.end()); });
}

}  // namespace ember
