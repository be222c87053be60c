#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace shapuq {

namespace stream_tag {
// Domain separators: draws made for different purposes never share a stream.
inline constexpr std::uint64_t kCoalitionDraw = 0x01;
inline constexpr std::uint64_t kPermutation = 0x02;
inline constexpr std::uint64_t kFeatureMatrix = 0x03;
inline constexpr std::uint64_t kTrueWeights = 0x04;
inline constexpr std::uint64_t kTargetNoise = 0x05;
inline constexpr std::uint64_t kGeneric = 0x06;
}  // namespace stream_tag

/// Counter-based random stream.  The stream is a pure function of
/// (seed, id0, id1, id2): the same key reproduces the same draws no matter
/// which thread consumes it or in what order streams are created, which is
/// what makes every sampling routine in the library schedule-independent.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t id0 = 0,
                     std::uint64_t id1 = 0, std::uint64_t id2 = 0) {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ id0);
    h = mix64(h ^ id1);
    h = mix64(h ^ id2);
    state_ = h;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double strictly inside (0, 1).
  double next_uniform() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Standard normal draw (Box-Muller, no cached spare).
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.28318530717958647692 * u2);
  }

  /// Uniform integer in [0, bound), bias-free by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Uniformly random permutation of {0, ..., n-1} (Fisher-Yates).
inline std::vector<int> random_permutation(int n, RngStream& stream) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int k = n - 1; k > 0; --k) {
    const int j = static_cast<int>(
        stream.next_below(static_cast<std::uint64_t>(k) + 1));
    std::swap(p[static_cast<std::size_t>(k)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

}  // namespace shapuq
