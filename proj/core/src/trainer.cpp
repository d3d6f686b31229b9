#include "styleid/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "styleid/errors.hpp"
#include "styleid/rng.hpp"

namespace styleid {

TrainConfig TrainConfig::sketch_profile() {
  TrainConfig cfg;
  cfg.epochs = 150;
  return cfg;
}

TrainConfig TrainConfig::cartoon_profile() {
  TrainConfig cfg;
  cfg.epochs = 500;
  return cfg;
}

void TrainConfig::validate() const {
  MixParams{alpha, swap, seed}.validate();
  if (!(lambda_feature >= 0.0)) throw InvalidArgument("lambda_feature must be non-negative");
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be positive");
}

std::string TrainHistory::to_log() const {
  std::string out;
  char line[160];
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu %.17g %.17g %.17g\n", e, epochs[e].ref,
                  epochs[e].feature, epochs[e].total);
    out += line;
  }
  return out;
}

SwapList default_swap_for(const Generator& g) {
  if (g.backend_id() == "toy") return toy_default_swap().truncated_to(g.layers());
  return stylegan_default_swap().truncated_to(g.layers());
}

SwapList effective_swap(const TrainConfig& cfg, const Generator& g) {
  return cfg.swap.truncated_to(g.layers());
}

namespace {

void scale_in_place(Image& img, double factor) {
  for (auto& v : img.pixels()) v *= factor;
}

}  // namespace

TrainResult fine_tune(const Generator& g, std::span<const Image> references, const Image& photo,
                      const TrainConfig& cfg, const FeatureStack& perc,
                      const InversionOptions& inv_opts) {
  cfg.validate();
  if (references.empty()) throw InvalidArgument("fine_tune: at least one reference is required");
  for (const auto& ref : references) {
    if (ref.shape() != g.output_shape()) {
      throw InvalidArgument("fine_tune: reference shape " + ref.shape().to_string() +
                            " does not match generator output " + g.output_shape().to_string());
    }
  }
  if (photo.shape() != g.output_shape()) {
    throw InvalidArgument("fine_tune: photo shape does not match generator output");
  }

  const SwapList swap = effective_swap(cfg, g);
  const MixParams mix_params{cfg.alpha, swap, cfg.seed};

  TrainResult res;
  for (const auto& ref : references) {
    res.reference_latents.push_back(invert(ref, g, inv_opts, perc).latent);
  }
  res.photo_latent = invert(photo, g, inv_opts, perc).latent;
  res.generator = g.clone();
  Generator& net = *res.generator;

  const auto n = static_cast<double>(references.size());
  std::vector<double> grad(net.params().size());
  LatentCode w_rand;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == 0 || cfg.resample_rand_each_epoch) {
      const std::uint64_t stream = cfg.resample_rand_each_epoch ? epoch : 0;
      w_rand = sample_random_style(res.reference_latents.front(), swap,
                                   derive_seed(cfg.seed, stream), g);
    }
    std::fill(grad.begin(), grad.end(), 0.0);

    EpochLoss rec;
    for (std::size_t i = 0; i < references.size(); ++i) {
      const LatentCode mixed = mix(res.reference_latents[i], w_rand, mix_params);
      Image grad_img;
      rec.ref += perc.distance(net.synthesize(mixed), references[i], grad_img);
      scale_in_place(grad_img, 1.0 / n);
      net.backward(mixed, grad_img, nullptr, grad);
    }
    rec.ref /= n;

    {
      Image grad_img;
      rec.feature = perc.distance(net.synthesize(res.photo_latent), photo, grad_img);
      if (cfg.lambda_feature > 0.0) {
        scale_in_place(grad_img, cfg.lambda_feature);
        net.backward(res.photo_latent, grad_img, nullptr, grad);
      }
    }
    rec.total = rec.ref + cfg.lambda_feature * rec.feature;
    if (!std::isfinite(rec.total)) {
      throw NumericalFailure("fine_tune: non-finite loss at epoch " + std::to_string(epoch));
    }
    res.history.epochs.push_back(rec);

    auto params = net.mutable_params();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= cfg.step_size * grad[i];
  }
  return res;
}

Image stylize(const Generator& trained, const Generator& pretrained, const Image& photo,
              const InversionOptions& inv_opts, const FeatureStack& perc) {
  if (photo.shape() != pretrained.output_shape()) {
    throw InvalidArgument("stylize: photo shape " + photo.shape().to_string() +
                          " does not match generator output " +
                          pretrained.output_shape().to_string());
  }
  if (trained.layers() != pretrained.layers() || trained.style_dim() != pretrained.style_dim()) {
    throw InvalidArgument("stylize: trained and pretrained generators disagree on latent shape");
  }
  const LatentCode w = invert(photo, pretrained, inv_opts, perc).latent;
  return trained.synthesize(w);
}

}  // namespace styleid
