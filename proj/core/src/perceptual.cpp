#include "styleid/perceptual.hpp"

#include <cmath>

#include "styleid/container.hpp"
#include "styleid/errors.hpp"
#include "styleid/rng.hpp"

namespace styleid {

namespace {

constexpr double kNormEps = 1e-10;
constexpr std::size_t kStageHeader = 5;

ImageShape conv_output_shape(const ImageShape& in, const ConvStage& st) {
  const std::size_t pad = st.kernel / 2;
  if (in.height + 2 * pad < st.kernel || in.width + 2 * pad < st.kernel) {
    throw InvalidArgument("feature stack: kernel larger than padded input");
  }
  return {(in.height + 2 * pad - st.kernel) / st.stride + 1,
          (in.width + 2 * pad - st.kernel) / st.stride + 1, st.out_channels};
}

void conv_forward(const ConvStage& st, const Image& in, Image& out) {
  const std::size_t pad = st.kernel / 2;
  const auto ih = static_cast<long>(in.height());
  const auto iw = static_cast<long>(in.width());
  const std::size_t k = st.kernel;
  for (std::size_t oy = 0; oy < out.height(); ++oy) {
    for (std::size_t ox = 0; ox < out.width(); ++ox) {
      for (std::size_t o = 0; o < st.out_channels; ++o) {
        double acc = st.bias[o];
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long y = static_cast<long>(oy * st.stride + ky) - static_cast<long>(pad);
          if (y < 0 || y >= ih) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long x = static_cast<long>(ox * st.stride + kx) - static_cast<long>(pad);
            if (x < 0 || x >= iw) continue;
            const double* w = st.weights.data() + ((o * st.in_channels) * k + ky) * k + kx;
            for (std::size_t i = 0; i < st.in_channels; ++i) {
              acc += w[i * k * k] * in.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), i);
            }
          }
        }
        out.at(oy, ox, o) = acc;
      }
    }
  }
}

void conv_backward_input(const ConvStage& st, const Image& grad_out, Image& grad_in) {
  const std::size_t pad = st.kernel / 2;
  const auto ih = static_cast<long>(grad_in.height());
  const auto iw = static_cast<long>(grad_in.width());
  const std::size_t k = st.kernel;
  for (std::size_t oy = 0; oy < grad_out.height(); ++oy) {
    for (std::size_t ox = 0; ox < grad_out.width(); ++ox) {
      for (std::size_t o = 0; o < st.out_channels; ++o) {
        const double g = grad_out.at(oy, ox, o);
        if (g == 0.0) continue;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const long y = static_cast<long>(oy * st.stride + ky) - static_cast<long>(pad);
          if (y < 0 || y >= ih) continue;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long x = static_cast<long>(ox * st.stride + kx) - static_cast<long>(pad);
            if (x < 0 || x >= iw) continue;
            const double* w = st.weights.data() + ((o * st.in_channels) * k + ky) * k + kx;
            for (std::size_t i = 0; i < st.in_channels; ++i) {
              grad_in.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), i) += w[i * k * k] * g;
            }
          }
        }
      }
    }
  }
}

}  // namespace

void ConvStage::validate() const {
  if (in_channels == 0 || out_channels == 0 || kernel == 0 || stride == 0) {
    throw InvalidArgument("conv stage: zero dimension");
  }
  if (weights.size() != out_channels * in_channels * kernel * kernel ||
      bias.size() != out_channels || channel_weights.size() != out_channels) {
    throw InvalidArgument("conv stage: weight sizes do not match declared shape");
  }
}

struct FeatureStack::Trace {
  std::vector<Image> pre;
  std::vector<Image> post;
};

FeatureStack::FeatureStack(ImageShape input, std::vector<ConvStage> stages, std::string id)
    : input_(input), stages_(std::move(stages)), id_(std::move(id)) {
  if (stages_.empty()) {
    throw InvalidArgument("feature stack: no stages");
  }
  ImageShape shape = input_;
  for (const auto& st : stages_) {
    st.validate();
    if (st.in_channels != shape.channels) {
      throw InvalidArgument("feature stack: stage expects " + std::to_string(st.in_channels) +
                            " channels, previous stage yields " + std::to_string(shape.channels));
    }
    shape = conv_output_shape(shape, st);
    stage_shapes_.push_back(shape);
  }
}

FeatureStack FeatureStack::seeded(ImageShape input, std::uint64_t seed) {
  const std::size_t widths[] = {8, 16, 16};
  NormalStream rng(derive_seed(seed, 0x9e));
  std::vector<ConvStage> stages;
  std::size_t in = input.channels;
  for (std::size_t out : widths) {
    ConvStage st;
    st.in_channels = in;
    st.out_channels = out;
    st.kernel = 3;
    st.stride = 2;
    st.relu = true;
    const double std = std::sqrt(2.0 / static_cast<double>(in * 9));
    st.weights.resize(out * in * 9);
    for (auto& w : st.weights) w = std * rng.next();
    st.bias.assign(out, 0.0);
    st.channel_weights.assign(out, 1.0);
    stages.push_back(std::move(st));
    in = out;
  }
  return FeatureStack(input, std::move(stages), "featurestack-seeded:" + std::to_string(seed));
}

void FeatureStack::save(const std::filesystem::path& path) const {
  WeightsContainer c;
  c.layers = static_cast<std::uint32_t>(stages_.size());
  c.height = static_cast<std::uint32_t>(input_.height);
  c.width = static_cast<std::uint32_t>(input_.width);
  c.channels = static_cast<std::uint32_t>(input_.channels);
  for (const auto& st : stages_) {
    c.values.push_back(static_cast<float>(st.in_channels));
    c.values.push_back(static_cast<float>(st.out_channels));
    c.values.push_back(static_cast<float>(st.kernel));
    c.values.push_back(static_cast<float>(st.stride));
    c.values.push_back(st.relu ? 1.0f : 0.0f);
    for (double w : st.weights) c.values.push_back(static_cast<float>(w));
    for (double b : st.bias) c.values.push_back(static_cast<float>(b));
    for (double l : st.channel_weights) c.values.push_back(static_cast<float>(l));
  }
  save_container(path, c);
}

FeatureStack FeatureStack::load(const std::filesystem::path& path) {
  const WeightsContainer c = load_container(path);
  std::vector<ConvStage> stages;
  std::size_t pos = 0;
  auto take = [&](std::size_t n) {
    if (pos + n > c.values.size()) {
      throw IoError("feature stack file truncated: " + path.string());
    }
    std::vector<double> out(c.values.begin() + static_cast<long>(pos),
                            c.values.begin() + static_cast<long>(pos + n));
    pos += n;
    return out;
  };
  for (std::uint32_t s = 0; s < c.layers; ++s) {
    const auto hdr = take(kStageHeader);
    ConvStage st;
    st.in_channels = static_cast<std::size_t>(hdr[0]);
    st.out_channels = static_cast<std::size_t>(hdr[1]);
    st.kernel = static_cast<std::size_t>(hdr[2]);
    st.stride = static_cast<std::size_t>(hdr[3]);
    st.relu = hdr[4] != 0.0;
    st.weights = take(st.out_channels * st.in_channels * st.kernel * st.kernel);
    st.bias = take(st.out_channels);
    st.channel_weights = take(st.out_channels);
    stages.push_back(std::move(st));
  }
  if (pos != c.values.size()) {
    throw IoError("feature stack file has trailing values: " + path.string());
  }
  return FeatureStack({c.height, c.width, c.channels}, std::move(stages),
                      "featurestack-file:" + path.filename().string());
}

void FeatureStack::require_input(const Image& image) const {
  if (image.shape() != input_) {
    throw InvalidArgument("feature stack: image " + image.shape().to_string() +
                          " does not match input " + input_.to_string());
  }
}

FeatureStack::Trace FeatureStack::forward(const Image& image) const {
  require_input(image);
  Trace t;
  const Image* in = &image;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    Image pre(stage_shapes_[s]);
    conv_forward(stages_[s], *in, pre);
    Image post = pre;
    if (stages_[s].relu) {
      // NaN passes through so non-finite inputs surface as non-finite losses.
      for (auto& v : post.pixels()) v = v < 0.0 ? 0.0 : v;
    }
    t.pre.push_back(std::move(pre));
    t.post.push_back(std::move(post));
    in = &t.post.back();
  }
  return t;
}

std::vector<Image> FeatureStack::features(const Image& image) const {
  return forward(image).post;
}

double FeatureStack::distance(const Image& a, const Image& b) const {
  require_same_shape(a, b, "perceptual distance");
  const Trace ta = forward(a);
  const Trace tb = forward(b);
  double total = 0.0;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const auto& fa = ta.post[s];
    const auto& fb = tb.post[s];
    const std::size_t nc = fa.channels();
    const std::size_t locs = fa.height() * fa.width();
    const auto& lin = stages_[s].channel_weights;
    double stage = 0.0;
    for (std::size_t p = 0; p < locs; ++p) {
      const double* va = fa.pixels().data() + p * nc;
      const double* vb = fb.pixels().data() + p * nc;
      double sa = 0.0, sb = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        sa += va[c] * va[c];
        sb += vb[c] * vb[c];
      }
      const double na = std::sqrt(sa) + kNormEps;
      const double nb = std::sqrt(sb) + kNormEps;
      double acc = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        const double d = va[c] / na - vb[c] / nb;
        acc += lin[c] * d * d;
      }
      stage += acc;
    }
    total += stage / static_cast<double>(locs);
  }
  return total;
}

double FeatureStack::distance(const Image& a, const Image& b, Image& grad_a) const {
  require_same_shape(a, b, "perceptual distance");
  const Trace ta = forward(a);
  const Trace tb = forward(b);
  const std::size_t n_stages = stages_.size();

  std::vector<Image> grad_post;
  grad_post.reserve(n_stages);
  for (std::size_t s = 0; s < n_stages; ++s) grad_post.emplace_back(stage_shapes_[s]);

  double total = 0.0;
  for (std::size_t s = 0; s < n_stages; ++s) {
    const auto& fa = ta.post[s];
    const auto& fb = tb.post[s];
    const std::size_t nc = fa.channels();
    const std::size_t locs = fa.height() * fa.width();
    const double inv_locs = 1.0 / static_cast<double>(locs);
    const auto& lin = stages_[s].channel_weights;
    std::vector<double> gh(nc);
    double stage = 0.0;
    for (std::size_t p = 0; p < locs; ++p) {
      const double* va = fa.pixels().data() + p * nc;
      const double* vb = fb.pixels().data() + p * nc;
      double* g = grad_post[s].pixels().data() + p * nc;
      double sa = 0.0, sb = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        sa += va[c] * va[c];
        sb += vb[c] * vb[c];
      }
      const double norm_a = std::sqrt(sa);
      const double na = norm_a + kNormEps;
      const double nb = std::sqrt(sb) + kNormEps;
      double acc = 0.0;
      double dot = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        const double d = va[c] / na - vb[c] / nb;
        acc += lin[c] * d * d;
        gh[c] = 2.0 * lin[c] * d * inv_locs;
        dot += gh[c] * va[c];
      }
      stage += acc;
      const double radial = norm_a > 0.0 ? dot / (na * na * norm_a) : 0.0;
      for (std::size_t c = 0; c < nc; ++c) g[c] = gh[c] / na - va[c] * radial;
    }
    total += stage * inv_locs;
  }

  grad_a = Image(input_);
  for (std::size_t s = n_stages; s-- > 0;) {
    Image& g = grad_post[s];
    if (stages_[s].relu) {
      auto pre = ta.pre[s].pixels();
      auto gp = g.pixels();
      for (std::size_t i = 0; i < gp.size(); ++i) {
        if (pre[i] <= 0.0) gp[i] = 0.0;
      }
    }
    Image& dst = s == 0 ? grad_a : grad_post[s - 1];
    conv_backward_input(stages_[s], g, dst);
  }
  return total;
}

std::vector<double> FeatureStack::pooled_features(const Image& image) const {
  const Trace t = forward(image);
  std::vector<double> out;
  out.reserve(pooled_dim());
  for (const auto& f : t.post) {
    const std::size_t nc = f.channels();
    const std::size_t locs = f.height() * f.width();
    std::vector<double> sums(nc, 0.0);
    for (std::size_t p = 0; p < locs; ++p) {
      for (std::size_t c = 0; c < nc; ++c) sums[c] += f.pixels()[p * nc + c];
    }
    for (double s : sums) out.push_back(s / static_cast<double>(locs));
  }
  return out;
}

std::size_t FeatureStack::pooled_dim() const {
  std::size_t n = 0;
  for (const auto& st : stages_) n += st.out_channels;
  return n;
}

double perc_distance(const Image& a, const Image& b, const FeatureStack& stack) {
  return stack.distance(a, b);
}

}  // namespace styleid
