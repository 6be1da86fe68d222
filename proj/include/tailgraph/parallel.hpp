#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tailgraph {

// Runs body(begin, end) over [0, n) split into contiguous row blocks, on up to
// `workers` threads.  Callers derive all randomness from the row index, so the
// output never depends on how rows are distributed.
inline void parallel_rows(std::size_t n, int workers,
                          const std::function<void(std::size_t, std::size_t)>& body) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  const std::size_t threads =
      std::min<std::size_t>(blocks, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < blocks; b += threads) {
          body(b * kBlock, std::min(n, (b + 1) * kBlock));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tailgraph
