#pragma once

#include <cstdint>
#include <random>

namespace styleid {

/// Seeded standard-normal stream.
///
/// The stream is fully specified so that other implementations can
/// regenerate it: a std::mt19937_64 seeded with `seed`; each normal draw
/// consumes two 64-bit words a, b and returns
///   sqrt(-2 ln u1) * cos(2 pi u2),
///   u1 = ((a >> 11) + 1) * 2^-53,  u2 = (b >> 11) * 2^-53.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next();
  double next_uniform();  // (b >> 11) * 2^-53, in [0, 1)

 private:
  std::mt19937_64 engine_;
};

// Splitmix-style mixing to derive independent child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace styleid
