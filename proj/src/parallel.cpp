#include "parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace asep {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> failures(count);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < count; i += stride) {
      try {
        fn(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work, w, workers);
  work(0, workers);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : failures)
    if (e) std::rethrow_exception(e);
}

int default_thread_count() {
  if (const char* env = std::getenv("ASEP_LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace asep
