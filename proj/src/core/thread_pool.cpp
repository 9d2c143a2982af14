#include "corrmap/core/thread_pool.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace corrmap {
namespace {

class Pool {
 public:
  explicit Pool(int workers) : n_workers_(workers) {
    for (int i = 1; i < n_workers_; ++i)
      threads_.emplace_back([this, i] { worker_loop(i); });
  }

  ~Pool() {
    {
      std::unique_lock lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int size() const { return n_workers_; }

  void run(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    const int chunks = (int)std::min<int64_t>(n_workers_, n);
    // Nested or concurrent calls: nested ones run inline, concurrent external
    // callers are serialized (one job slot).
    if (chunks == 1 || in_worker_) {
      fn(0, n);
      return;
    }
    std::unique_lock run_lk(run_mu_);
    {
      std::unique_lock lk(mu_);
      job_ = &fn;
      job_n_ = n;
      job_chunks_ = chunks;
      pending_ = chunks - 1;  // chunk 0 runs on the calling thread
      ++epoch_;
    }
    cv_.notify_all();
    run_chunk(0);
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void run_chunk(int idx) {
    const int64_t per = (job_n_ + job_chunks_ - 1) / job_chunks_;
    const int64_t lo = idx * per;
    const int64_t hi = std::min<int64_t>(job_n_, lo + per);
    if (lo < hi) (*job_)(lo, hi);
  }

  void worker_loop(int idx) {
    in_worker_ = true;
    uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
      }
      if (idx < job_chunks_) {
        run_chunk(idx);
        std::unique_lock lk(mu_);
        if (--pending_ == 0) done_cv_.notify_one();
      }
    }
  }

  static thread_local bool in_worker_;

  int n_workers_;
  std::vector<std::thread> threads_;
  std::mutex run_mu_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  bool stop_ = false;
  uint64_t epoch_ = 0;
  const std::function<void(int64_t, int64_t)>* job_ = nullptr;
  int64_t job_n_ = 0;
  int job_chunks_ = 0;
  int pending_ = 0;
};

thread_local bool Pool::in_worker_ = false;

Pool& pool() {
  static Pool p([] {
    if (const char* env = std::getenv("CORRMAP_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return std::min(v, 64);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return (int)std::clamp(hc, 1u, 8u);
  }());
  return p;
}

}  // namespace

int worker_count() { return pool().size(); }

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  pool().run(n, fn);
}

}  // namespace corrmap
