#include "lw/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lw {

void parallel_rows(int height, int threads,
                   const std::function<void(int, int)>& fn) {
  threads = std::max(1, std::min(threads, height));
  if (threads == 1) {
    fn(0, height);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  int base = height / threads;
  int extra = height % threads;
  int row = 0;
  for (int t = 0; t < threads; ++t) {
    int rows = base + (t < extra ? 1 : 0);
    int begin = row;
    int end = row + rows;
    row = end;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LIQUIDWARP_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

}  // namespace lw
