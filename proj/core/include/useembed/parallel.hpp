#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace useembed {

// Worker cap. USE_EMBED_THREADS overrides hardware concurrency when set.
int worker_count();

// Splits [0, n) into a fixed number of contiguous chunks (independent of the
// worker count), evaluates fn(lo, hi) per chunk, and returns the partials in
// chunk order. Callers reduce the vector sequentially, so results are
// bit-identical no matter how many threads ran.
template <class Partial, class Fn>
std::vector<Partial> map_chunks(std::size_t n, Fn&& fn) {
  constexpr std::size_t kMaxChunks = 64;
  const std::size_t nchunks = n < kMaxChunks ? n : kMaxChunks;
  std::vector<Partial> partials(nchunks);
  if (nchunks == 0) return partials;

  auto bounds = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>{c * n / nchunks, (c + 1) * n / nchunks};
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), nchunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      auto [lo, hi] = bounds(c);
      partials[c] = fn(lo, hi);
    }
    return partials;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < nchunks; c = next.fetch_add(1)) {
        auto [lo, hi] = bounds(c);
        partials[c] = fn(lo, hi);
      }
    });
  }
  for (auto& t : pool) t.join();
  return partials;
}

}  // namespace useembed
