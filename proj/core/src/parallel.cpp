#include "germcal/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace germcal {

namespace {
std::atomic<int> g_jobs{1};
}

void set_jobs(int n) { g_jobs.store(n < 1 ? 1 : n); }
int jobs() { return g_jobs.load(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  int workers = jobs();
  if (workers <= 1 || n < 2 * workers) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace germcal
