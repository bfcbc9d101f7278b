#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace braceforge {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

/// Number of worker threads. Capped by the BRACE_FORGE_THREADS environment
/// variable when set; defaults to hardware concurrency.
unsigned thread_count();

/// Runs fn(chunk_index, begin, end) over [0, total) split into fixed-size
/// chunks. Chunk boundaries depend only on `total`, never on the thread
/// count, so per-chunk results can be merged deterministically.
void parallel_chunks(u64 total, u64 grain,
                     const std::function<void(u64, u64, u64)>& fn);

u64 chunk_count(u64 total, u64 grain);

// SplitMix64. Counter-based: stream(seed, t) is a pure function, so sampled
// verification is reproducible independent of scheduling.
inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline u64 rng_stream(u64 seed, u64 counter) {
  return splitmix64(seed ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

/// Deterministic map of a 64-bit random word onto [0, bound).
inline u64 rng_below(u64 word, u64 bound) {
  return static_cast<u64>((static_cast<u128>(word) * bound) >> 64);
}

}  // namespace braceforge
