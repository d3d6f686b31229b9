#include "styleid/sample_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "styleid/errors.hpp"
#include "styleid/rng.hpp"

namespace styleid {

namespace {

// Sketch-like rendering in logit space: luminance only, boosted contrast,
// warm paper tint. Reaching it requires changing the generator's colour
// mixing, which no latent can do.
constexpr double kStyleMatrix[3][3] = {
    {0.30, 0.59, 0.11},
    {0.30, 0.59, 0.11},
    {0.30, 0.59, 0.11},
};
constexpr double kStyleOffset[3] = {0.35, 0.2, 0.0};
constexpr double kStyleGain = 1.4;
constexpr double kResidualAmplitude = 0.3;

double logit(double p) {
  const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(q / (1.0 - q));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Per-reference low-frequency idiosyncrasy, one pattern shared by all
// channels with channel-specific weights.
std::vector<double> residual_pattern(const ImageShape& shape, std::uint64_t seed) {
  NormalStream rng(seed);
  std::vector<double> out(shape.size(), 0.0);
  std::vector<double> channel_w(shape.channels);
  for (auto& w : channel_w) w = rng.next();
  for (int comp = 0; comp < 2; ++comp) {
    const double fx = std::floor(rng.next_uniform() * 3.0) - 1.0;
    const double fy = 1.0 + std::floor(rng.next_uniform() * 2.0);
    const double phase = 2.0 * std::numbers::pi * rng.next_uniform();
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < shape.width; ++x) {
        const double v = std::cos(2.0 * std::numbers::pi *
                                      (fx * static_cast<double>(x) / static_cast<double>(shape.width) +
                                       fy * static_cast<double>(y) / static_cast<double>(shape.height)) +
                                  phase);
        for (std::size_t c = 0; c < shape.channels; ++c) {
          out[(y * shape.width + x) * shape.channels + c] += kResidualAmplitude * channel_w[c] * v;
        }
      }
    }
  }
  return out;
}

Image stylized(const Image& photo, const std::vector<double>& residual) {
  Image out(photo.shape());
  const std::size_t nc = photo.channels();
  for (std::size_t p = 0; p < photo.height() * photo.width(); ++p) {
    for (std::size_t c = 0; c < nc; ++c) {
      double z = kStyleOffset[c % 3];
      for (std::size_t j = 0; j < nc; ++j) {
        z += kStyleGain * kStyleMatrix[c % 3][j % 3] * logit(photo.pixels()[p * nc + j]);
      }
      out.pixels()[p * nc + c] = sigmoid(z + residual[p * nc + c]);
    }
  }
  return out;
}

}  // namespace

SampleSet make_sample_set(const Generator& g, std::size_t photos, std::size_t references,
                          std::uint64_t seed) {
  if (g.output_shape().channels != 3) {
    throw InvalidArgument("sample set: generator must produce RGB images");
  }
  SampleSet set;
  for (std::size_t i = 0; i < photos; ++i) {
    set.photos.push_back(g.synthesize(g.sample_prior(derive_seed(seed, 2 * i))));
  }
  for (std::size_t i = 0; i < references; ++i) {
    const Image face = g.synthesize(g.sample_prior(derive_seed(seed, 2 * i + 1)));
    set.references.push_back(
        stylized(face, residual_pattern(g.output_shape(), derive_seed(seed ^ 0xA57, i))));
  }
  return set;
}

std::vector<Image> make_constant_noise_set(const ImageShape& shape, std::size_t count,
                                           std::span<const double> channel_means,
                                           double offset_std, double noise_std,
                                           std::uint64_t seed) {
  if (channel_means.size() != shape.channels) {
    throw InvalidArgument("constant-noise set: one mean per channel is required");
  }
  NormalStream rng(seed);
  std::vector<Image> out;
  out.reserve(count);
  std::vector<double> level(shape.channels);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t c = 0; c < shape.channels; ++c) {
      level[c] = channel_means[c] + offset_std * rng.next();
    }
    Image img(shape);
    auto px = img.pixels();
    for (std::size_t p = 0; p < shape.height * shape.width; ++p) {
      for (std::size_t c = 0; c < shape.channels; ++c) {
        px[p * shape.channels + c] = level[c] + noise_std * rng.next();
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

FeatureStack linear_probe_stack(const ImageShape& shape, std::size_t out_channels,
                                std::uint64_t seed) {
  NormalStream rng(derive_seed(seed, 0x11));
  ConvStage st;
  st.in_channels = shape.channels;
  st.out_channels = out_channels;
  st.kernel = 1;
  st.stride = 1;
  st.relu = false;
  st.weights.resize(out_channels * shape.channels);
  for (auto& w : st.weights) w = static_cast<float>(rng.next());
  st.bias.resize(out_channels);
  for (auto& b : st.bias) b = static_cast<float>(0.1 * rng.next());
  st.channel_weights.assign(out_channels, 1.0);
  return FeatureStack(shape, {st}, "linear-probe:" + std::to_string(seed));
}

}  // namespace styleid
