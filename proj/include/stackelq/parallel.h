#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stackelq {

// Runs body(begin, end) over contiguous blocks of [0, count). Blocks write
// disjoint outputs; the first exception thrown by any block is rethrown.
template <typename Body>
void ParallelBlocks(int count, int workers, Body body) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const int chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace stackelq
