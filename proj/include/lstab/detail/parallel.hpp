// SPDX-FileCopyrightText: The lstab authors
// SPDX-License-Identifier: Apache-2.0

#ifndef LSTAB_DETAIL_PARALLEL_HPP
#define LSTAB_DETAIL_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace lstab::detail {

/// Runs fn(0..n-1) across `jobs` threads. Work items must be independent;
/// results written by index stay deterministic regardless of thread count.
/// The first captured exception (by thread index) is rethrown after join.
template <class Fn>
void parallel_for(long n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lstab::detail

#endif
