#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace dcm {

/// Resolves a requested worker count; 0 means available parallelism.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Workers parallel_chunks will use for this many chunks.
inline unsigned worker_count(std::size_t num_chunks, unsigned threads) {
  return static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(num_chunks, 1)));
}

/// Calls body(chunk) or body(chunk, worker) for every chunk in
/// [0, num_chunks). Chunks are handed out dynamically, so any result that
/// must be reproducible has to depend only on the chunk index; the worker
/// index is for scratch space only. Returns the number of workers used.
template <class Body>
unsigned parallel_chunks(std::size_t num_chunks, unsigned threads, Body&& body) {
  threads = worker_count(num_chunks, threads);
  auto call = [&](std::size_t c, unsigned w) {
    if constexpr (std::is_invocable_v<Body&, std::size_t, unsigned>)
      body(c, w);
    else
      body(c);
  };
  if (threads <= 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) call(c, 0);
    return 1;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&](unsigned w) {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= num_chunks) return;
      try {
        call(c, w);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = num_chunks;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return threads;
}

}  // namespace dcm
