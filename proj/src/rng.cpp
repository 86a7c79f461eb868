#include "superdiff/rng.hpp"

#include <cmath>

#include "superdiff/types.hpp"

namespace superdiff::rng {

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t counter) noexcept {
  const std::uint64_t h1 = counter_hash(seed, stream, 2 * counter);
  const std::uint64_t h2 = counter_hash(seed, stream, 2 * counter + 1);
  const double radius = std::sqrt(-2.0 * std::log(to_unit_open(h1)));
  const double angle = 2.0 * kPi * to_unit_open(h2);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace superdiff::rng
