#include "braceforge/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace braceforge {

unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("BRACE_FORGE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    if (v >= 1 && static_cast<unsigned>(v) > hw) hw = static_cast<unsigned>(v);
  }
  return hw;
}

u64 chunk_count(u64 total, u64 grain) {
  if (total == 0) return 0;
  if (grain == 0) grain = 1;
  return (total + grain - 1) / grain;
}

void parallel_chunks(u64 total, u64 grain,
                     const std::function<void(u64, u64, u64)>& fn) {
  if (total == 0) return;
  if (grain == 0) grain = 1;
  const u64 nchunks = chunk_count(total, grain);
  unsigned nthreads = thread_count();
  if (nchunks == 1 || nthreads == 1) {
    for (u64 c = 0; c < nchunks; ++c) {
      u64 b = c * grain;
      u64 e = std::min(total, b + grain);
      fn(c, b, e);
    }
    return;
  }
  std::atomic<u64> next{0};
  auto worker = [&]() {
    for (;;) {
      u64 c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= nchunks) return;
      u64 b = c * grain;
      u64 e = std::min(total, b + grain);
      fn(c, b, e);
    }
  };
  std::vector<std::thread> pool;
  unsigned spawn = static_cast<unsigned>(std::min<u64>(nthreads, nchunks));
  pool.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace braceforge
