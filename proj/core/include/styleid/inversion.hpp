#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "styleid/generator.hpp"
#include "styleid/perceptual.hpp"

namespace styleid {

struct InversionOptions {
  std::size_t steps = 300;
  double step_size = 4.0;
  double perceptual_weight = 1.0;
  double pixel_weight = 0.1;
  std::uint64_t seed = 0;
  // Prior samples averaged for the mean-latent initialization.
  std::size_t mean_samples = 4096;

  void validate() const;
};

struct InversionResult {
  LatentCode latent;
  double final_loss = 0.0;
  // Best-so-far loss after each step; entry 0 is the initialization.
  std::vector<double> best_loss;
};

/// Objective minimized by invert(); optionally returns dLoss/dw.
double inversion_loss(const Image& target, const Generator& g, const LatentCode& w,
                      const InversionOptions& opts, const FeatureStack& perc,
                      LatentCode* grad_w = nullptr);

/// Fixed-step gradient descent in the extended latent space starting at
/// the generator's mean latent. Returns the best iterate seen. The
/// generator is only read.
InversionResult invert(const Image& target, const Generator& g, const InversionOptions& opts,
                       const FeatureStack& perc);

}  // namespace styleid
