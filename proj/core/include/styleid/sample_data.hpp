#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <span>

#include "styleid/generator.hpp"
#include "styleid/perceptual.hpp"

namespace styleid {

/// Procedural stand-in for a photo/portrait dataset.
///
/// Photos are generator samples. A reference is the sample rendered in
/// the target style (a fixed colour transform plus contrast gain in logit
/// space) with an individual low-frequency "artist" residual on top, so
/// single references carry idiosyncrasies that a few-shot set averages
/// out.
struct SampleSet {
  std::vector<Image> photos;
  std::vector<Image> references;
};

SampleSet make_sample_set(const Generator& g, std::size_t photos, std::size_t references,
                          std::uint64_t seed);

/// Images whose channel c is channel_means[c] + offset + noise, with one
/// N(0, offset_std^2) offset per image and channel and i.i.d.
/// N(0, noise_std^2) pixel noise. No clamping.
std::vector<Image> make_constant_noise_set(const ImageShape& shape, std::size_t count,
                                           std::span<const double> channel_means,
                                           double offset_std, double noise_std,
                                           std::uint64_t seed);

/// Single linear 1x1 stage (no ReLU) with seeded weights and bias; its
/// pooled features are an affine function of per-channel pixel means.
FeatureStack linear_probe_stack(const ImageShape& shape, std::size_t out_channels,
                                std::uint64_t seed);

}  // namespace styleid
