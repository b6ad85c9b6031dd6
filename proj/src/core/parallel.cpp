// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace pnprl {

namespace {

thread_local bool in_worker = false;

class Pool {
 public:
  explicit Pool(int n) {
    for (int i = 0; i < n; ++i) {
      threads_.emplace_back([this] {
        in_worker = true;
        for (;;) {
          std::function<void()> task;
          {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [this] { return stop_ || !queue_.empty(); });
            if (stop_ && queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop();
          }
          task();
        }
      });
    }
  }

  ~Pool() {
    {
      std::lock_guard lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void submit(std::function<void()> task) {
    {
      std::lock_guard lk(mu_);
      queue_.push(std::move(task));
    }
    cv_.notify_one();
  }

 private:
  std::vector<std::thread> threads_;
  std::queue<std::function<void()>> queue_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
};

Pool& pool() {
  static Pool p(thread_count());
  return p;
}

}  // namespace

int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("PNPRL_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = thread_count();
  if (n == 1 || workers <= 1 || in_worker) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(n, workers);
  std::atomic<std::size_t> done{0};
  std::mutex mu;
  std::condition_variable cv;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    pool().submit([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
      if (done.fetch_add(1) + 1 == chunks) {
        std::lock_guard lk(mu);
        cv.notify_one();
      }
    });
  }
  std::unique_lock lk(mu);
  cv.wait(lk, [&] { return done.load() == chunks; });
}

}  // namespace pnprl
