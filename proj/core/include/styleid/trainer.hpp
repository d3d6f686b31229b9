#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "styleid/generator.hpp"
#include "styleid/inversion.hpp"
#include "styleid/perceptual.hpp"

namespace styleid {

struct TrainConfig {
  double alpha = 0.5;
  SwapList swap = stylegan_default_swap();
  double lambda_feature = 0.001;
  std::size_t epochs = 150;
  double step_size = 0.3;
  std::uint64_t seed = 0;
  bool resample_rand_each_epoch = true;

  static TrainConfig sketch_profile();   // 150 epochs
  static TrainConfig cartoon_profile();  // 500 epochs

  void validate() const;
};

struct EpochLoss {
  double ref = 0.0;
  double feature = 0.0;
  double total = 0.0;
};

struct TrainHistory {
  std::vector<EpochLoss> epochs;

  std::size_t size() const { return epochs.size(); }
  // "epoch L_ref L_feature total" per line, %.17g.
  std::string to_log() const;
};

struct TrainResult {
  std::unique_ptr<Generator> generator;
  TrainHistory history;
  std::vector<LatentCode> reference_latents;
  LatentCode photo_latent;
};

/// Toy backends get the multi-row toy profile; other backends the
/// reference list, truncated to their depth.
SwapList default_swap_for(const Generator& g);

/// Swap list adjusted to the generator's depth (indices >= L dropped).
SwapList effective_swap(const TrainConfig& cfg, const Generator& g);

/// Fine-tunes a clone of `g` on a few style references while anchoring
/// the input photo's identity.
///
/// References and photo are inverted once with `g`; the latents stay
/// frozen. Each epoch draws a random style (fresh per epoch unless
/// disabled), mixes it into every reference latent, and takes one
/// gradient step on the clone's parameters for
///   mean_i perc(G(mix_i), ref_i) + lambda_feature * perc(G(w_photo), photo).
/// History entry e holds the loss at the parameters before step e.
TrainResult fine_tune(const Generator& g, std::span<const Image> references, const Image& photo,
                      const TrainConfig& cfg, const FeatureStack& perc,
                      const InversionOptions& inv_opts);

/// Inverts `photo` with the pretrained generator and renders the latent
/// with the fine-tuned one.
Image stylize(const Generator& trained, const Generator& pretrained, const Image& photo,
              const InversionOptions& inv_opts, const FeatureStack& perc);

}  // namespace styleid
