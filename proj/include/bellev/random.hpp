#ifndef BELLEV_RANDOM_HPP
#define BELLEV_RANDOM_HPP

// Seeded substreams and a chunked parallel map.  Work is cut into fixed-size
// chunks, each chunk gets its own engine derived from (seed, component, chunk),
// so results do not depend on how many workers run the chunks.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace bellev {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream identifiers for the independent consumers of a seed.
enum class StreamComponent : std::uint64_t {
  qm_prior = 1,
  lhv_prior = 2,
  mle_starts = 3,
  bias_mocks = 4,
  bias_data = 5,
  simulation = 6,
  test = 7,
};

inline Engine substream(std::uint64_t seed, std::uint64_t component, std::uint64_t chunk) {
  const std::uint64_t k0 = splitmix64(seed);
  const std::uint64_t k1 = splitmix64(k0 ^ splitmix64(component + 0x632be59bd9b4e019ULL));
  const std::uint64_t k2 = splitmix64(k1 ^ splitmix64(chunk + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32),
                    static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32)};
  return Engine(seq);
}

inline Engine substream(std::uint64_t seed, StreamComponent component, std::uint64_t chunk) {
  return substream(seed, static_cast<std::uint64_t>(component), chunk);
}

inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads.  Indices are handed
/// out dynamically; the first exception thrown is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(n, 1u << 16))));
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) threads.emplace_back(body);
  body();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

/// Runs fn(engine, begin, end) over [0, n) split into chunks of `chunk_size`.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunk_size, std::uint64_t seed,
                     StreamComponent component, unsigned workers, Fn&& fn) {
  const std::size_t chunks = (n + chunk_size - 1) / chunk_size;
  parallel_for(chunks, workers, [&](std::size_t c) {
    Engine engine = substream(seed, component, c);
    fn(engine, c * chunk_size, std::min(n, (c + 1) * chunk_size));
  });
}

/// Fixed-order pairwise summation; the result does not depend on thread count.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
  if (n <= 8) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& x) {
  return pairwise_sum(x.data(), x.size());
}

}  // namespace bellev

#endif  // BELLEV_RANDOM_HPP
