#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace doqos {

/// Resolve a worker count; 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Split [0, total) into fixed-size chunks and evaluate fn(chunk_index, begin,
/// count) for each, possibly concurrently. Results come back in chunk order,
/// so any reduction over them is independent of the worker count.
template <typename Result, typename Fn>
std::vector<Result> run_chunks(std::uint64_t total, std::uint64_t chunk_size, unsigned workers,
                               Fn&& fn) {
  const std::uint64_t n_chunks = total == 0 ? 0 : (total + chunk_size - 1) / chunk_size;
  std::vector<Result> results(n_chunks);
  if (n_chunks == 0) return results;

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::uint64_t chunk = next.fetch_add(1);
      if (chunk >= n_chunks) return;
      const std::uint64_t begin = chunk * chunk_size;
      const std::uint64_t count = std::min(chunk_size, total - begin);
      try {
        results[chunk] = fn(chunk, begin, count);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), n_chunks));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace doqos
