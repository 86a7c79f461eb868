#pragma once

#include <cstdint>
#include <utility>

namespace superdiff::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless hash of (seed, stream, counter). Every draw in the project is a
/// pure function of these three integers.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
  return mix64(mix64(mix64(seed) ^ stream) + 0x632be59bd9b4e019ULL * (counter + 1));
}

/// Child seed for a tagged sub-purpose (environment, noise, ...) and index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
  return counter_hash(seed, (tag << 48) ^ index, 0x5eed);
}

/// Uniform in (0, 1], never 0 so it is safe under log.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Pair of independent standard normals from two hashed uniforms (Box–Muller).
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t counter) noexcept;

/// Sequential view over one (seed, stream): an incrementing counter.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  std::pair<double, double> normal_pair() noexcept {
    return rng::normal_pair(seed_, stream_, counter_++);
  }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace superdiff::rng
