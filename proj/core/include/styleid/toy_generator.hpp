#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "styleid/generator.hpp"

namespace styleid {

struct ToyGeneratorShape {
  std::size_t layers = 8;
  std::size_t style_dim = 16;
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
};

/// Small closed-form style generator.
///
/// Layer k owns a base pattern B_k (H x W, band-limited to spatial
/// frequency band 1 + k mod (min(H,W)/2)) and an affine head mapping
/// latent row w_k to (scale_k, shift_k) = A_k w_k + a_k. Each layer
/// contributes (1 + scale_k) B_k + shift_k; a L x C matrix M mixes the
/// layer contributions into output channels, a per-channel bias is added
/// and a logistic sigmoid squashes the result into (0, 1):
///
///   image[y,x,c] = sigmoid(bias_c + sum_k M[k,c] ((1 + scale_k) B_k[y,x] + shift_k))
///
/// All of B, A, a, M and bias are trainable. Parameters are stored in that
/// order; see layout(). The latent prior is i.i.d. standard normal.
class ToyGenerator final : public Generator {
 public:
  /// Seeded initialization. Parameters are rounded to float32 so that a
  /// checkpoint round trip is exact.
  explicit ToyGenerator(ToyGeneratorShape shape = {}, std::uint64_t seed = 0);

  /// Wraps an existing parameter vector (e.g. loaded from a checkpoint).
  ToyGenerator(ToyGeneratorShape shape, std::vector<double> params);

  static std::size_t param_count(const ToyGeneratorShape& shape);

  std::string backend_id() const override { return "toy"; }
  std::size_t layers() const override { return shape_.layers; }
  std::size_t style_dim() const override { return shape_.style_dim; }
  ImageShape output_shape() const override {
    return {shape_.height, shape_.width, shape_.channels};
  }
  const ToyGeneratorShape& shape() const { return shape_; }

  LatentCode sample_prior(std::uint64_t seed) const override;

  Image synthesize(const LatentCode& w) const override;
  // Pre-sigmoid activations; same layout as the image.
  Image synthesize_logits(const LatentCode& w) const;

  void backward(const LatentCode& w, const Image& grad_image, LatentCode* grad_w,
                std::span<double> grad_params) const override;

  std::span<const double> params() const override { return params_; }
  std::span<double> mutable_params() override { return params_; }
  std::vector<ParamSegment> layout() const override;

  std::unique_ptr<Generator> clone() const override;

  // Frequency band owned by layer k.
  std::size_t band_of_layer(std::size_t layer) const;

 private:
  struct Offsets {
    std::size_t base, affine, affine_bias, mixing, channel_bias, end;
  };
  Offsets offsets() const;
  void modulation(const LatentCode& w, std::vector<double>& scale, std::vector<double>& shift) const;

  ToyGeneratorShape shape_;
  std::vector<double> params_;
};

}  // namespace styleid
