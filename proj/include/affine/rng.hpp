#ifndef AFFINE_RNG_HPP
#define AFFINE_RNG_HPP

#include <cstdint>

namespace affine {

/// Counter-based random stream.  The value at index k is a pure function of
/// (seed, stream, k), so a path can be extended lazily and reproduce bitwise
/// the values a longer one-shot generation would have produced.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// 64-bit avalanche mix (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic child-stream id; used to key drivers, samples and channels.
inline std::uint64_t substream(std::uint64_t parent, std::uint64_t tag) {
  return mix64(parent ^ (tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

inline std::uint64_t rng_word(const RngStream& s, std::uint64_t k) {
  std::uint64_t base = mix64(mix64(s.seed + 0x632BE59BD9B4E019ULL) ^
                             mix64(s.stream ^ 0x9E6C63D0876A9ED3ULL));
  return mix64(base + k * 0x9E3779B97F4A7C15ULL);
}

/// Uniform draw in the open interval (0,1); never returns 0 or 1.
inline double rng_uniform(const RngStream& s, std::uint64_t k) {
  return (static_cast<double>(rng_word(s, k) >> 11) + 0.5) * 0x1.0p-53;
}

/// Quantile of the standard normal distribution, accurate to ~1e-15.
double normal_quantile(double p);

inline double rng_normal(const RngStream& s, std::uint64_t k) {
  return normal_quantile(rng_uniform(s, k));
}

// Stream channels: one per independent use of randomness inside a driver.
inline constexpr std::uint64_t kChannelGrid = 1;       // Gaussian grid increments
inline constexpr std::uint64_t kChannelJumpTimes = 2;  // arrival gaps
inline constexpr std::uint64_t kChannelJumpSizes = 3;  // jump size draws

}  // namespace affine

#endif
