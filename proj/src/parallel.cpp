#include "kvh/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace kvh {
namespace {

std::atomic<int> g_thread_count{0};

int resolved_threads() {
  int n = g_thread_count.load(std::memory_order_relaxed);
  if (n <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return n;
}

constexpr std::size_t kGrain = 16384;

}  // namespace

void set_thread_count(int count) { g_thread_count.store(count < 0 ? 0 : count, std::memory_order_relaxed); }

int thread_count() { return resolved_threads(); }

void parallel_for_grain(std::size_t n, std::size_t grain,
                        const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (grain == 0) grain = 1;
  const int workers = resolved_threads();
  const std::size_t chunks = (n + grain - 1) / grain;
  if (workers <= 1 || chunks <= 1) {
    fn(0, n);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) break;
      const std::size_t begin = c * grain;
      const std::size_t end = begin + grain < n ? begin + grain : n;
      fn(begin, end);
    }
  };
  const int spawn = static_cast<int>(chunks < static_cast<std::size_t>(workers) ? chunks : static_cast<std::size_t>(workers)) - 1;
  std::vector<std::thread> pool;
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  parallel_for_grain(n, kGrain, fn);
}

namespace {

template <class T>
T pairwise_impl(const T* xs, std::size_t n) {
  if (n <= 32) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += xs[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_impl(xs, half) + pairwise_impl(xs + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) { return pairwise_impl(xs.data(), xs.size()); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> xs) {
  return pairwise_impl(xs.data(), xs.size());
}

}  // namespace kvh
