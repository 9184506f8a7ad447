#pragma once

#include <algorithm>
#include <span>
#include <thread>
#include <vector>

namespace odeco {

/// Worker count used by data-parallel loops; 0 selects the hardware count.
void set_num_threads(int n);
int num_threads();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Results must be
/// written to per-index storage so the outcome does not depend on the
/// number of workers.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(num_threads(), std::max(1, n / 64));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

/// Pairwise summation in a fixed order.
double pairwise_sum(std::span<const double> values);

}  // namespace odeco
