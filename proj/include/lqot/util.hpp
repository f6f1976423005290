#pragma once

// Shared helpers: deterministic RNG, stable hashing, string utilities and a
// tiny static-chunking parallel_for. Everything whose output feeds a
// reproducibility contract draws randomness from Rng below, never from
// std:: distributions (their output is implementation defined).

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lqot {

// splitmix64. Small state, passes BigCrush on its own output, and trivially
// portable. next_index() is unbiased via rejection sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t next_index(std::uint64_t bound);

  // Fisher-Yates. Deterministic for a given seed on every platform.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent seed from (base, salt). Used to hand each sampled
// query or epoch its own stream without sequential coupling.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

// FNV-1a, 64 bit. Stable across platforms; keys prompt caches and fixtures.
std::uint64_t fnv1a64(std::string_view s);
std::string hash_hex(std::uint64_t h);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Replaces every occurrence of `from` (must be non-empty) with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

// Runs fn(begin, end) over [0, n) in contiguous chunks on `threads` threads
// (0 = hardware concurrency). Chunk boundaries depend only on n and the
// thread count, so writes into preallocated slots stay deterministic.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace lqot
