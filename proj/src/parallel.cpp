#include "odeco/parallel.hpp"

#include <atomic>

namespace odeco {

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) { g_threads = std::max(0, n); }

int num_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace odeco
