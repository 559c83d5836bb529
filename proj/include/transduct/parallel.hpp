#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace transduct {

/// Worker count for row-parallel kernels. TRANSDUCT_THREADS caps it; the
/// default is the hardware concurrency.
inline std::size_t worker_count() {
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRANSDUCT_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return std::min<std::size_t>(hw, static_cast<std::size_t>(v));
    } catch (...) {
    }
  }
  return hw;
}

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// thread and bodies must only write their own outputs, so results do not
/// depend on the worker count.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_per_worker = 64) {
  std::size_t workers = std::min(worker_count(), count / std::max<std::size_t>(1, min_per_worker));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
}

}  // namespace transduct
