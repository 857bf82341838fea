#ifndef HARMAP_UTIL_HPP
#define HARMAP_UTIL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace harmap {

/// Chunked parallel loop. Chunking depends only on (n, threads), and callers
/// reduce per-chunk results in index order, so results are reproducible for a
/// fixed thread count. threads <= 1 runs inline.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  int nt = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

/// 8-point Gauss-Legendre rule on [0,1].
struct Gauss8 {
  static constexpr int n = 8;
  static const double x[8];
  static const double w[8];
};

/// 4-point Gauss-Legendre rule on [0,1].
struct Gauss4 {
  static constexpr int n = 4;
  static const double x[4];
  static const double w[4];
};

/// Least-squares fit y ~ a*f(x) + b. Returns {a, b, max relative deviation}.
struct LineFit {
  double a = 0, b = 0, residual = 0;
};
LineFit fit_affine(const std::vector<double>& f, const std::vector<double>& y);

/// FNV-1a over a byte string; used for scene hashing.
std::uint64_t fnv1a(const std::string& bytes);

/// Deterministic small PRNG (splitmix64) for seeded test scenes and forms.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// uniform in [0,1)
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  /// uniform in [a,b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
};

}  // namespace harmap

#endif
