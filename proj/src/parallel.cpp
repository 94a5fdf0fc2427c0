#include "ehjb/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ehjb {

namespace {
std::atomic<int> g_threads{0};

int resolve_auto() {
  if (const char* env = std::getenv("ERGODIC_HJB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}
}  // namespace

int thread_count() {
  int n = g_threads.load();
  return n >= 1 ? n : resolve_auto();
}

void set_thread_count(int n) { g_threads.store(n >= 1 ? n : 0); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t count = end > begin ? end - begin : 0;
  if (count == 0) return;
  const int workers = thread_count();
  if (workers <= 1 || count == 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::size_t n = static_cast<std::size_t>(workers) < count
                            ? static_cast<std::size_t>(workers)
                            : count;
  std::vector<std::thread> pool;
  pool.reserve(n);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < n; ++w) {
    std::size_t lo = begin + count * w / n;
    std::size_t hi = begin + count * (w + 1) / n;
    pool.emplace_back([lo, hi, &body, &first_error, &error_mutex] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ehjb
