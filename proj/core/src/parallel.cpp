#include "latq/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace latq {

void parallel_chunks(std::size_t total, std::size_t chunk_count, int threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn) {
  if (total == 0) return;
  chunk_count = std::max<std::size_t>(1, std::min(chunk_count, total));
  auto chunk_begin = [&](std::size_t c) { return c * total / chunk_count; };

  const std::size_t workers = std::min<std::size_t>(
      chunk_count, threads > 1 ? static_cast<std::size_t>(threads) : 1);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunk_count; ++c)
      fn(c, chunk_begin(c), chunk_begin(c + 1));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunk_count) return;
      try {
        fn(c, chunk_begin(c), chunk_begin(c + 1));
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace latq
