#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace srnbound {

/** SplitMix64 finalizer. */
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/**
 * Counter-based generator: draw n is a pure function of (key, n), where the
 * key combines a user seed with a configuration hash and a stream id.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t config_hash = 0, std::uint64_t stream = 0)
      : key_(mix64(mix64(seed) ^ mix64(config_hash + 0x632BE59BD9B4E019ULL) ^
                   mix64(stream + 0x8CB92BA72F3D8DD7ULL))) {}

  std::uint64_t next() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /** Uniform in the open interval (0, 1). */
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace srnbound
