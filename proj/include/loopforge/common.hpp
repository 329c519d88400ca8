#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace loopforge {

template <int D>
using Point = Eigen::Matrix<double, D, 1>;

template <int D>
using Points = Eigen::Matrix<double, D, Eigen::Dynamic>;

// Error taxonomy. Every failure mode a caller can trigger with bad data gets
// its own type so tests can assert on the exact condition.
struct DegenerateCurve : std::runtime_error { using std::runtime_error::runtime_error; };
struct OutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvalidInterval : std::runtime_error { using std::runtime_error::runtime_error; };
struct EmptyMeasure : std::runtime_error { using std::runtime_error::runtime_error; };
struct NoValidDelta : std::runtime_error { using std::runtime_error::runtime_error; };
struct EpsilonOutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct IterationLimitExceeded : std::runtime_error { using std::runtime_error::runtime_error; };
struct AlphaOutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct PointOnSupport : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonpositiveTime : std::runtime_error { using std::runtime_error::runtime_error; };
struct BadExponents : std::runtime_error { using std::runtime_error::runtime_error; };
struct WidthTooSmall : std::runtime_error { using std::runtime_error::runtime_error; };
struct GridTooCoarse : std::runtime_error { using std::runtime_error::runtime_error; };
struct NotSolenoidal : std::runtime_error { using std::runtime_error::runtime_error; };
struct DimensionTooSmall : std::runtime_error { using std::runtime_error::runtime_error; };
struct FormatError : std::runtime_error { using std::runtime_error::runtime_error; };

inline int thread_count() {
  static const int n = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("LOOPFORGE_THREADS")) {
      int cap = std::atoi(env);
      if (cap > 0 && cap < hw) hw = cap;
    }
    return hw;
  }();
  return n;
}

namespace detail {
inline bool& inside_worker_pool() {
  static thread_local bool inside = false;
  return inside;
}
}  // namespace detail

// Chunked parallel map over [0, n). Results must be written to preallocated
// per-index slots so the output does not depend on thread scheduling.
// Nested calls from inside a worker run serially instead of spawning again.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& chunk_body,
                         std::int64_t serial_below = 256) {
  const int workers = thread_count();
  if (n <= 0) return;
  if (workers == 1 || n < serial_below || detail::inside_worker_pool()) {
    chunk_body(0, n);
    return;
  }
  const std::int64_t chunks = std::min<std::int64_t>(workers * 4, n);
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      detail::inside_worker_pool() = true;
      for (;;) {
        std::int64_t c = next.fetch_add(1);
        if (c >= chunks) return;
        std::int64_t lo = n * c / chunks;
        std::int64_t hi = n * (c + 1) / chunks;
        chunk_body(lo, hi);
      }
    });
  }
  for (auto& t : pool) t.join();
}

inline void parallel_for_each(std::int64_t n, const std::function<void(std::int64_t)>& body,
                              std::int64_t serial_below = 256) {
  parallel_for(n, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) body(i);
  }, serial_below);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Deterministic per-item RNG stream: outputs are independent of thread
// scheduling because each item derives its own engine from (seed, index).
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t mix = fnv1a64(&index, sizeof(index), seed ^ 0x9e3779b97f4a7c15ull);
  return std::mt19937_64(mix);
}

}  // namespace loopforge
