#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace styleid {

/// A point in the generator's extended latent space: one D-dimensional
/// style vector per generator layer, stored row-major (L rows x D cols).
class LatentCode {
 public:
  LatentCode() = default;
  LatentCode(std::size_t layers, std::size_t dim);
  LatentCode(std::size_t layers, std::size_t dim, std::vector<double> values);

  std::size_t layers() const { return layers_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }

  double operator()(std::size_t layer, std::size_t j) const { return values_[layer * dim_ + j]; }
  double& operator()(std::size_t layer, std::size_t j) { return values_[layer * dim_ + j]; }

  std::span<const double> row(std::size_t layer) const;
  std::span<double> row(std::size_t layer);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const LatentCode& other) const {
    return layers_ == other.layers_ && dim_ == other.dim_;
  }
  bool all_finite() const;

  friend bool operator==(const LatentCode&, const LatentCode&) = default;

 private:
  std::size_t layers_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

/// Strictly increasing set of layer indices whose rows carry style.
class SwapList {
 public:
  SwapList() = default;
  explicit SwapList(std::vector<std::size_t> indices);

  // Accepts "7,9,11", "[7, 9, 11]" or "" (empty list).
  static SwapList parse(std::string_view text);

  const std::vector<std::size_t>& indices() const { return indices_; }
  bool empty() const { return indices_.empty(); }
  std::size_t size() const { return indices_.size(); }
  bool contains(std::size_t layer) const;

  // Throws InvalidArgument when any index is >= layers.
  void validate_for(std::size_t layers) const;

  // Copy with every index >= layers removed (a warning is logged per drop).
  SwapList truncated_to(std::size_t layers) const;

  std::string to_string() const;

  friend bool operator==(const SwapList&, const SwapList&) = default;

 private:
  std::vector<std::size_t> indices_;
};

/// The reference swap list for 18-layer style generators.
SwapList stylegan_default_swap();
/// Multi-row swap profile for the 8-layer toy generator.
SwapList toy_default_swap();

struct MixParams {
  double alpha = 0.5;
  SwapList swap;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Decoupled {
  LatentCode independent;
  LatentCode related;
};

/// Anything that can draw full latents from its prior.
class LatentPrior {
 public:
  virtual ~LatentPrior() = default;
  virtual LatentCode sample_prior(std::uint64_t seed) const = 0;
};

/// Splits `w` by row mask: swap rows go to `related`, the rest to
/// `independent`. The two parts sum to `w` exactly.
Decoupled decouple(const LatentCode& w, const SwapList& swap);

/// independent(w_s) + alpha * related(w_s) + (1 - alpha) * w_rand, applied
/// on swap rows only. Rows outside the swap list are copied bit-for-bit.
LatentCode mix(const LatentCode& w_s, const LatentCode& w_rand, const MixParams& params);

/// Fresh prior sample restricted to swap rows; zero elsewhere.
LatentCode sample_random_style(const LatentCode& templ, const SwapList& swap, std::uint64_t seed,
                               const LatentPrior& prior);

}  // namespace styleid
