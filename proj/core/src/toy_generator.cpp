#include "styleid/toy_generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "styleid/errors.hpp"
#include "styleid/rng.hpp"

namespace styleid {

namespace {

constexpr std::size_t kPatternComponents = 4;
constexpr double kAffineGain = 0.5;
constexpr double kMixingGain = 1.5;
constexpr double kChannelBiasStd = 0.25;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void validate_shape(const ToyGeneratorShape& s) {
  if (s.layers == 0 || s.style_dim == 0 || s.height < 2 || s.width < 2 || s.channels == 0) {
    throw InvalidArgument("toy generator: degenerate shape");
  }
}

}  // namespace

std::size_t ToyGenerator::param_count(const ToyGeneratorShape& s) {
  return s.layers * s.height * s.width + s.layers * 2 * s.style_dim + s.layers * 2 +
         s.layers * s.channels + s.channels;
}

ToyGenerator::Offsets ToyGenerator::offsets() const {
  const auto& s = shape_;
  Offsets o{};
  o.base = 0;
  o.affine = o.base + s.layers * s.height * s.width;
  o.affine_bias = o.affine + s.layers * 2 * s.style_dim;
  o.mixing = o.affine_bias + s.layers * 2;
  o.channel_bias = o.mixing + s.layers * s.channels;
  o.end = o.channel_bias + s.channels;
  return o;
}

std::size_t ToyGenerator::band_of_layer(std::size_t layer) const {
  const std::size_t nyquist = std::min(shape_.height, shape_.width) / 2;
  return 1 + layer % nyquist;
}

ToyGenerator::ToyGenerator(ToyGeneratorShape shape, std::uint64_t seed) : shape_(shape) {
  validate_shape(shape_);
  params_.assign(param_count(shape_), 0.0);
  const Offsets o = offsets();
  const std::size_t hw = shape_.height * shape_.width;

  NormalStream rng(derive_seed(seed, 0x70));
  for (std::size_t k = 0; k < shape_.layers; ++k) {
    const auto band = static_cast<long>(band_of_layer(k));
    double* pattern = params_.data() + o.base + k * hw;
    for (std::size_t p = 0; p < kPatternComponents; ++p) {
      long fx = 0;
      long fy = 0;
      const auto pick = [&](long lo, long hi) {
        const auto span = static_cast<double>(hi - lo + 1);
        return lo + std::min(static_cast<long>(rng.next_uniform() * span), hi - lo);
      };
      if (rng.next_uniform() < 0.5) {
        fy = band;
        fx = pick(-band, band);
      } else {
        fx = rng.next_uniform() < 0.5 ? -band : band;
        fy = pick(0, band);
      }
      const double amp = 0.5 + rng.next_uniform();
      const double phase = 2.0 * std::numbers::pi * rng.next_uniform();
      for (std::size_t y = 0; y < shape_.height; ++y) {
        for (std::size_t x = 0; x < shape_.width; ++x) {
          const double arg = 2.0 * std::numbers::pi *
                                 (static_cast<double>(fx) * static_cast<double>(x) /
                                      static_cast<double>(shape_.width) +
                                  static_cast<double>(fy) * static_cast<double>(y) /
                                      static_cast<double>(shape_.height)) +
                             phase;
          pattern[y * shape_.width + x] += amp * std::cos(arg);
        }
      }
    }
    double energy = 0.0;
    for (std::size_t i = 0; i < hw; ++i) energy += pattern[i] * pattern[i];
    const double rms = std::sqrt(energy / static_cast<double>(hw));
    for (std::size_t i = 0; i < hw; ++i) pattern[i] /= rms;
  }

  const double affine_std = kAffineGain / std::sqrt(static_cast<double>(shape_.style_dim));
  for (std::size_t i = o.affine; i < o.affine_bias; ++i) params_[i] = affine_std * rng.next();
  const double mixing_std = kMixingGain / std::sqrt(static_cast<double>(shape_.layers));
  for (std::size_t i = o.mixing; i < o.channel_bias; ++i) params_[i] = mixing_std * rng.next();
  for (std::size_t i = o.channel_bias; i < o.end; ++i) params_[i] = kChannelBiasStd * rng.next();

  for (auto& v : params_) v = static_cast<double>(static_cast<float>(v));
}

ToyGenerator::ToyGenerator(ToyGeneratorShape shape, std::vector<double> params)
    : shape_(shape), params_(std::move(params)) {
  validate_shape(shape_);
  if (params_.size() != param_count(shape_)) {
    throw InvalidArgument("toy generator: expected " + std::to_string(param_count(shape_)) +
                          " parameters, got " + std::to_string(params_.size()));
  }
}

LatentCode ToyGenerator::sample_prior(std::uint64_t seed) const {
  LatentCode w(shape_.layers, shape_.style_dim);
  NormalStream rng(seed);
  for (auto& v : w.values()) v = rng.next();
  return w;
}

void ToyGenerator::modulation(const LatentCode& w, std::vector<double>& scale,
                              std::vector<double>& shift) const {
  const Offsets o = offsets();
  const std::size_t d = shape_.style_dim;
  scale.assign(shape_.layers, 0.0);
  shift.assign(shape_.layers, 0.0);
  for (std::size_t k = 0; k < shape_.layers; ++k) {
    const double* a_scale = params_.data() + o.affine + (2 * k) * d;
    const double* a_shift = a_scale + d;
    auto row = w.row(k);
    double s = params_[o.affine_bias + 2 * k];
    double t = params_[o.affine_bias + 2 * k + 1];
    for (std::size_t j = 0; j < d; ++j) {
      s += a_scale[j] * row[j];
      t += a_shift[j] * row[j];
    }
    scale[k] = s;
    shift[k] = t;
  }
}

Image ToyGenerator::synthesize_logits(const LatentCode& w) const {
  require_latent_shape(w);
  const Offsets o = offsets();
  const std::size_t hw = shape_.height * shape_.width;
  const std::size_t nc = shape_.channels;
  std::vector<double> scale, shift;
  modulation(w, scale, shift);

  Image z(output_shape());
  auto out = z.pixels();
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t c = 0; c < nc; ++c) out[p * nc + c] = params_[o.channel_bias + c];
  }
  for (std::size_t k = 0; k < shape_.layers; ++k) {
    const double* pattern = params_.data() + o.base + k * hw;
    const double* mixing = params_.data() + o.mixing + k * nc;
    const double gain = 1.0 + scale[k];
    for (std::size_t p = 0; p < hw; ++p) {
      const double contrib = gain * pattern[p] + shift[k];
      for (std::size_t c = 0; c < nc; ++c) out[p * nc + c] += mixing[c] * contrib;
    }
  }
  return z;
}

Image ToyGenerator::synthesize(const LatentCode& w) const {
  Image img = synthesize_logits(w);
  for (auto& v : img.pixels()) v = sigmoid(v);
  return img;
}

void ToyGenerator::backward(const LatentCode& w, const Image& grad_image, LatentCode* grad_w,
                            std::span<double> grad_params) const {
  require_latent_shape(w);
  if (grad_image.shape() != output_shape()) {
    throw InvalidArgument("toy generator backward: gradient image shape mismatch");
  }
  if (!grad_params.empty() && grad_params.size() != params_.size()) {
    throw InvalidArgument("toy generator backward: parameter gradient size mismatch");
  }
  if (grad_w != nullptr) require_latent_shape(*grad_w);

  const Offsets o = offsets();
  const std::size_t hw = shape_.height * shape_.width;
  const std::size_t nc = shape_.channels;
  const std::size_t d = shape_.style_dim;
  std::vector<double> scale, shift;
  modulation(w, scale, shift);

  Image gz = synthesize(w);
  {
    auto g = gz.pixels();
    auto up = grad_image.pixels();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = up[i] * g[i] * (1.0 - g[i]);
  }
  auto gzp = gz.pixels();
  const bool want_params = !grad_params.empty();

  if (want_params) {
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t c = 0; c < nc; ++c) grad_params[o.channel_bias + c] += gzp[p * nc + c];
    }
  }

  std::vector<double> gcontrib(hw);
  for (std::size_t k = 0; k < shape_.layers; ++k) {
    const double* pattern = params_.data() + o.base + k * hw;
    const double* mixing = params_.data() + o.mixing + k * nc;
    const double gain = 1.0 + scale[k];
    double dscale = 0.0;
    double dshift = 0.0;
    for (std::size_t p = 0; p < hw; ++p) {
      double acc = 0.0;
      for (std::size_t c = 0; c < nc; ++c) acc += gzp[p * nc + c] * mixing[c];
      gcontrib[p] = acc;
      dscale += acc * pattern[p];
      dshift += acc;
    }
    if (want_params) {
      double* dpattern = grad_params.data() + o.base + k * hw;
      double* dmixing = grad_params.data() + o.mixing + k * nc;
      for (std::size_t p = 0; p < hw; ++p) {
        dpattern[p] += gcontrib[p] * gain;
        const double contrib = gain * pattern[p] + shift[k];
        for (std::size_t c = 0; c < nc; ++c) dmixing[c] += gzp[p * nc + c] * contrib;
      }
      double* da_scale = grad_params.data() + o.affine + (2 * k) * d;
      double* da_shift = da_scale + d;
      auto row = w.row(k);
      for (std::size_t j = 0; j < d; ++j) {
        da_scale[j] += dscale * row[j];
        da_shift[j] += dshift * row[j];
      }
      grad_params[o.affine_bias + 2 * k] += dscale;
      grad_params[o.affine_bias + 2 * k + 1] += dshift;
    }
    if (grad_w != nullptr) {
      const double* a_scale = params_.data() + o.affine + (2 * k) * d;
      const double* a_shift = a_scale + d;
      auto grow = grad_w->row(k);
      for (std::size_t j = 0; j < d; ++j) grow[j] += dscale * a_scale[j] + dshift * a_shift[j];
    }
  }
}

std::vector<ParamSegment> ToyGenerator::layout() const {
  const Offsets o = offsets();
  const auto& s = shape_;
  return {
      {"base_patterns", o.base, {s.layers, s.height, s.width}},
      {"style_affine", o.affine, {s.layers, 2, s.style_dim}},
      {"style_affine_bias", o.affine_bias, {s.layers, 2}},
      {"channel_mixing", o.mixing, {s.layers, s.channels}},
      {"channel_bias", o.channel_bias, {s.channels}},
  };
}

std::unique_ptr<Generator> ToyGenerator::clone() const {
  return std::make_unique<ToyGenerator>(*this);
}

}  // namespace styleid
