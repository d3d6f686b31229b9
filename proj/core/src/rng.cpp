#include "styleid/rng.hpp"

#include <cmath>
#include <numbers>

namespace styleid {

namespace {
constexpr double kTwoPow53 = 1.0 / 9007199254740992.0;
}

double NormalStream::next_uniform() { return static_cast<double>(engine_() >> 11) * kTwoPow53; }

double NormalStream::next() {
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kTwoPow53;
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace styleid
