#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace aclab {

// SplitMix64 (Vigna/Steele). Chosen because the whole stream is pinned by a
// 64-bit integer state and three multiply-xorshift lines, so "same seed, same
// results" is checkable against the vectors in docs/prng.md.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53 mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo,hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0,n). n must be > 0. Rejection-free modulo is fine
  // here: n is tiny (task counts, pixel coordinates) so the bias is < 2^-59.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; the cosine/sine pair is cached so the
  // stream consumes exactly two uniforms per two normals.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Fisher-Yates partial shuffle: writes a random k-subset of {0..n-1} as the
  // first k entries of the returned index vector.
  std::vector<int> choose_k_of_n(int k, int n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

  void shuffle(std::vector<int>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// FNV-1a over the tag bytes; used to derive independent named streams from
// one base seed.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Named substream: seed the generator with base^hash(tag), then advance once
// so trivially related base seeds do not produce trivially related streams.
inline SplitMix64 substream(std::uint64_t base_seed, std::string_view tag) {
  SplitMix64 g(base_seed ^ fnv1a64(tag));
  g.next_u64();
  return g;
}

}  // namespace aclab
