#include "collusion/parallel.hpp"

#include <atomic>

namespace collusion {

namespace {
std::atomic<std::size_t> g_workers{1};
}

std::size_t worker_count() { return g_workers.load(); }

void set_worker_count(std::size_t n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  g_workers.store(n);
}

}  // namespace collusion
