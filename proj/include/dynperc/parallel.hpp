#ifndef DYNPERC_PARALLEL_HPP
#define DYNPERC_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace dynperc {

// Runs task(i, worker) for i in [0, n). Tasks must write only to slot i of
// their outputs, so results never depend on scheduling. If tasks throw, the
// exception of the smallest index is rethrown after all workers stop.
struct Executor {
  int workers = 1;

  void run(std::size_t n, const std::function<void(std::size_t, int)>& task) const {
    if (workers < 1) throw std::invalid_argument("workers: must be >= 1");
    if (workers == 1 || n < 2) {
      for (std::size_t i = 0; i < n; ++i) task(i, 0);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex m;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto body = [&](int w) {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          task(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
          stop = true;
        }
      }
    };
    std::vector<std::thread> pool;
    const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    pool.reserve(static_cast<std::size_t>(k));
    for (int w = 0; w < k; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
};

}  // namespace dynperc

#endif  // DYNPERC_PARALLEL_HPP
