#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bdt {

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of child `index` in stream `stream` of `parent`. Replicate k of a
// campaign with master seed m uses derive_seed(m, 0, k); independent layers
// of one replicate use derive_seed(replicate_seed, layer, 0) and so on. The
// result depends only on the three inputs, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

// Engine plus the few draws the samplers need. mt19937_64 is fully specified
// by the standard, so streams are identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }

  double standard_normal() {
    // Box-Muller; one draw per call keeps the stream position predictable.
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bdt
