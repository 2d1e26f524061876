#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace homfrac {

inline int default_threads() {
  if (const char* env = std::getenv("HOMFRAC_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v, 0, v.size());
}

/// Runs fn over blocks [b*block_size, min((b+1)*block_size, n)) and returns the
/// per-block results in block order. Blocks are independent and the reduction
/// order is fixed, so combined results are identical for any worker count.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(long long n, long long block_size, int threads, Fn&& fn) {
  long long n_blocks = (n + block_size - 1) / block_size;
  std::vector<Acc> out(static_cast<std::size_t>(std::max<long long>(n_blocks, 0)));
  if (threads <= 0) threads = default_threads();
  if (threads == 1 || n_blocks <= 1) {
    for (long long b = 0; b < n_blocks; ++b)
      out[static_cast<std::size_t>(b)] = fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (long long b = t; b < n_blocks; b += threads)
        out[static_cast<std::size_t>(b)] = fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace homfrac
