#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bdt {

// Worker count from the BDT_WORKERS environment variable, else the hardware
// concurrency, at least 1.
int worker_count();

// out[i] = f(i) for i in [0, n), evaluated on up to `workers` threads. The
// result does not depend on the worker count or scheduling. If any call
// throws, the exception of the smallest failing index is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f, int workers = worker_count()) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, workers > 0 ? workers : 1);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace bdt
