#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace condaudio {

// Worker cap: min(hardware threads, CONDAUDIO_THREADS), at least one.
inline std::size_t worker_count() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("CONDAUDIO_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1 && std::size_t(v) < n) n = std::size_t(v);
  }
  return n;
}

// Index-parallel loop; exceptions from workers are rethrown (first one wins).
// Callers are responsible for writing results into per-index slots so the
// reduction order stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace condaudio
