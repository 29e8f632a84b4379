#pragma once

// Seed derivation and random sampling. All randomness in the project flows
// through this header so that results are reproducible bit-for-bit across
// platforms: the generator is mt19937_64 (fixed by the standard) and the
// distributions are implemented here instead of relying on the
// implementation-defined std::uniform_real_distribution and friends.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace false_al {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to fold strings into seed material and config hashes.
inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <std::integral T>
std::uint64_t seed_part(T v) {
  return splitmix64(static_cast<std::uint64_t>(v));
}

inline std::uint64_t seed_part(std::string_view s) { return fnv1a(s); }

// Derives an independent stream seed from a base seed and a list of parts
// (integers or strings), e.g. derive_seed(seed, "shuffle", round, epoch).
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) {
  std::uint64_t h = splitmix64(base);
  ((h = splitmix64(h ^ seed_part(parts))), ...);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller. No cached spare: every call consumes
  // exactly two uniforms, which keeps call sites order-independent.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Moves a uniform without-replacement sample of size b to the front of v.
  template <typename T>
  void partial_shuffle(std::vector<T>& v, std::size_t b) {
    for (std::size_t i = 0; i < b && i + 1 < v.size(); ++i) {
      std::swap(v[i], v[i + below(v.size() - i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace false_al
