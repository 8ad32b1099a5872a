#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

namespace dnls {

/// Upper bound on worker threads for independent jobs (solver scans).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Run job(i) for i in [0, count) on at most max_threads() threads.
/// Results land in index order, so output never depends on scheduling.
/// The first exception (by index) is rethrown after all workers finish.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& job) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(max_threads(), count));
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < count; i += workers) {
      try {
        slots[i].emplace(job(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dnls
