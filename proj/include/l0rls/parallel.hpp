#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace l0rls {

/// Runs body(i) for i in [0, count) across a bounded pool of worker threads.
/// Work items must write only to their own output slots; results are then
/// independent of scheduling, so any fixed-order reduction over i stays
/// deterministic. The first exception thrown by a work item is rethrown.
template <typename Body>
void parallel_for(int count, Body&& body) {
  if (count <= 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const int workers = static_cast<int>(std::min<unsigned>(hw, count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace l0rls
