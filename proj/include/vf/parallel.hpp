#pragma once

// Index-partitioned loops that run either serially (the reference path used
// by tests) or under OpenMP. Work is assigned by index and results are
// written to index-addressed slots, so both paths produce identical output.

#include <cstddef>
#include <exception>
#include <mutex>

namespace vf {

enum class Execution { serial, parallel };

/// Worker count for parallel regions: VF_THREADS if set and positive, else
/// the OpenMP default.
int worker_threads();

namespace detail {

// Keeps the exception thrown at the lowest index so that the error reported
// by the parallel path matches the serial one.
class FirstError {
 public:
  void record(std::size_t index, std::exception_ptr e) {
    std::lock_guard lock(mu_);
    if (!err_ || index < index_) {
      err_ = e;
      index_ = index;
    }
  }
  void rethrow() const {
    if (err_) std::rethrow_exception(err_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr err_;
  std::size_t index_ = 0;
};

}  // namespace detail

template <class Fn>
void for_each_index(std::size_t n, Execution ex, Fn&& fn) {
  if (ex == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  detail::FirstError first;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      first.record(static_cast<std::size_t>(i), std::current_exception());
    }
  }
  first.rethrow();
}

}  // namespace vf
