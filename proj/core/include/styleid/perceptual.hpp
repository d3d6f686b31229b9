#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "styleid/image.hpp"

namespace styleid {

/// Maps an image to a fixed-length feature vector (used by FID).
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<double> pooled_features(const Image& image) const = 0;
  virtual std::string id() const = 0;
};

/// One convolution stage. Weights are laid out [out][in][ky][kx]; zero
/// padding of kernel/2 on every side.
struct ConvStage {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  bool relu = true;
  std::vector<double> weights;
  std::vector<double> bias;
  // Per-channel weights applied to squared normalized differences. All
  // ones gives the uniform LPIPS aggregation.
  std::vector<double> channel_weights;

  void validate() const;
};

/// Fixed convolutional feature stack with LPIPS-style aggregation:
/// per stage, features are unit-normalized along channels at each spatial
/// location, squared differences are (channel-weighted) summed over
/// channels, averaged over space and summed over stages.
///
/// Immutable after construction; all queries are thread-safe.
class FeatureStack final : public FeatureExtractor {
 public:
  FeatureStack(ImageShape input, std::vector<ConvStage> stages, std::string id);

  /// Default stack: three 3x3 stride-2 ReLU stages, C -> 8 -> 16 -> 16,
  /// He-normal weights drawn from `seed`, zero bias.
  static FeatureStack seeded(ImageShape input, std::uint64_t seed);

  /// Loads external weights from a SIDG1 container (see save()).
  static FeatureStack load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const ImageShape& input_shape() const { return input_; }
  const std::vector<ConvStage>& stages() const { return stages_; }

  double distance(const Image& a, const Image& b) const;
  /// Distance plus its gradient with respect to `a` (written to grad_a).
  double distance(const Image& a, const Image& b, Image& grad_a) const;

  /// Per-stage raw activations (stage-major list of C x h x w maps, HWC).
  std::vector<Image> features(const Image& image) const;
  /// Per-channel spatial mean of every stage, concatenated.
  std::vector<double> pooled_features(const Image& image) const override;
  std::size_t pooled_dim() const;

  std::string id() const override { return id_; }

 private:
  struct Trace;
  Trace forward(const Image& image) const;
  void require_input(const Image& image) const;

  ImageShape input_;
  std::vector<ConvStage> stages_;
  std::vector<ImageShape> stage_shapes_;
  std::string id_;
};

double perc_distance(const Image& a, const Image& b, const FeatureStack& stack);

}  // namespace styleid
