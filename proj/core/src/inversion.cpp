#include "styleid/inversion.hpp"

#include <cmath>

#include "styleid/errors.hpp"

namespace styleid {

void InversionOptions::validate() const {
  if (!(step_size > 0.0)) throw InvalidArgument("inversion: step_size must be positive");
  if (!(perceptual_weight >= 0.0) || !(pixel_weight >= 0.0)) {
    throw InvalidArgument("inversion: loss weights must be non-negative");
  }
  if (steps > 0 && perceptual_weight == 0.0 && pixel_weight == 0.0) {
    throw InvalidArgument("inversion: at least one loss weight must be positive");
  }
  if (mean_samples < 1) throw InvalidArgument("inversion: mean_samples must be >= 1");
}

double inversion_loss(const Image& target, const Generator& g, const LatentCode& w,
                      const InversionOptions& opts, const FeatureStack& perc, LatentCode* grad_w) {
  const Image img = g.synthesize(w);
  require_same_shape(img, target, "inversion");
  double loss = 0.0;
  Image grad_img(img.shape());
  if (opts.perceptual_weight > 0.0) {
    Image gp;
    loss += opts.perceptual_weight * perc.distance(img, target, gp);
    auto dst = grad_img.pixels();
    auto src = gp.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += opts.perceptual_weight * src[i];
  }
  if (opts.pixel_weight > 0.0) {
    auto a = img.pixels();
    auto b = target.pixels();
    auto dst = grad_img.pixels();
    const double n = static_cast<double>(a.size());
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      mse += d * d;
      dst[i] += opts.pixel_weight * 2.0 * d / n;
    }
    loss += opts.pixel_weight * mse / n;
  }
  if (grad_w != nullptr) {
    *grad_w = LatentCode(w.layers(), w.dim());
    g.backward(w, grad_img, grad_w, {});
  }
  return loss;
}

InversionResult invert(const Image& target, const Generator& g, const InversionOptions& opts,
                       const FeatureStack& perc) {
  opts.validate();
  if (target.shape() != g.output_shape()) {
    throw InvalidArgument("inversion: target " + target.shape().to_string() +
                          " does not match generator output " + g.output_shape().to_string());
  }
  LatentCode w = g.mean_latent(opts.mean_samples, opts.seed);
  InversionResult res;
  res.best_loss.reserve(opts.steps + 1);

  LatentCode grad;
  double loss = inversion_loss(target, g, w, opts, perc, opts.steps > 0 ? &grad : nullptr);
  if (!std::isfinite(loss)) throw NumericalFailure("inversion: non-finite loss at step 0");
  res.latent = w;
  res.final_loss = loss;
  res.best_loss.push_back(loss);

  for (std::size_t step = 1; step <= opts.steps; ++step) {
    auto wv = w.values();
    auto gv = grad.values();
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= opts.step_size * gv[i];
    loss = inversion_loss(target, g, w, opts, perc, step < opts.steps ? &grad : nullptr);
    if (!std::isfinite(loss) || !w.all_finite()) {
      throw NumericalFailure("inversion: non-finite loss at step " + std::to_string(step));
    }
    if (loss < res.final_loss) {
      res.final_loss = loss;
      res.latent = w;
    }
    res.best_loss.push_back(res.final_loss);
  }
  return res;
}

}  // namespace styleid
