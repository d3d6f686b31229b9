#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "styleid/image.hpp"
#include "styleid/latent.hpp"

namespace styleid {

/// Named slice of a generator's flat parameter vector.
struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;

  std::size_t count() const;
};

/// Differentiable map from latents to images with a flat trainable
/// parameter vector.
///
/// Backends: the built-in ToyGenerator, or any externally trained
/// style-based generator wrapped behind this interface. Reading methods are
/// safe to call concurrently; mutable_params() requires exclusive access.
class Generator : public LatentPrior {
 public:
  ~Generator() override = default;

  virtual std::string backend_id() const = 0;
  virtual std::size_t layers() const = 0;
  virtual std::size_t style_dim() const = 0;
  virtual ImageShape output_shape() const = 0;

  virtual Image synthesize(const LatentCode& w) const = 0;

  /// Vector-Jacobian product at `w`: given dLoss/dImage, accumulates
  /// dLoss/dw into `grad_w` (if non-null) and dLoss/dparams into
  /// `grad_params` (if non-empty; must then have params().size() entries).
  virtual void backward(const LatentCode& w, const Image& grad_image, LatentCode* grad_w,
                        std::span<double> grad_params) const = 0;

  virtual std::span<const double> params() const = 0;
  virtual std::span<double> mutable_params() = 0;
  virtual std::vector<ParamSegment> layout() const = 0;

  virtual std::unique_ptr<Generator> clone() const = 0;

  /// Elementwise mean of `n` prior samples drawn with seeds seed, seed+1, ...
  LatentCode mean_latent(std::size_t n, std::uint64_t seed) const;

  void require_latent_shape(const LatentCode& w) const;
};

/// Resolves a backend spec: "toy" (optionally "toy:SEED") or
/// "checkpoint:PATH".
std::unique_ptr<Generator> make_backend(const std::string& spec);

}  // namespace styleid
