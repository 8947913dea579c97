#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace texting {

// Error with a stable machine-readable code ("missing_file", "bad_config", ...)
// plus a human message. The CLI serializes both.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

// Worker-thread cap. Reads TEXTING_THREADS once; overridable for tests.
int worker_threads();
void set_worker_threads(int n);

namespace detail {

// Runs fn(chunk_index, begin, end) over [0, n_items) split into fixed-size
// chunks. Chunk boundaries depend only on chunk_size, never on the thread
// count, so any reduction done per chunk and folded in chunk order gives
// identical results for every TEXTING_THREADS setting.
template <class F>
void parallel_chunks(int n_items, int chunk_size, F&& fn) {
  if (n_items <= 0) return;
  if (chunk_size < 1) chunk_size = 1;
  const int n_chunks = (n_items + chunk_size - 1) / chunk_size;
  int workers = worker_threads();
  if (workers > n_chunks) workers = n_chunks;

  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) {
      const int lo = c * chunk_size;
      const int hi = std::min(n_items, lo + chunk_size);
      fn(c, lo, hi);
    }
    return;
  }

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto body = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      const int lo = c * chunk_size;
      const int hi = std::min(n_items, lo + chunk_size);
      try {
        fn(c, lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

std::string lowercase_ascii(std::string_view s);

}  // namespace texting
