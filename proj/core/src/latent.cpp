#include "styleid/latent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "styleid/errors.hpp"

namespace styleid {

LatentCode::LatentCode(std::size_t layers, std::size_t dim)
    : layers_(layers), dim_(dim), values_(layers * dim, 0.0) {}

LatentCode::LatentCode(std::size_t layers, std::size_t dim, std::vector<double> values)
    : layers_(layers), dim_(dim), values_(std::move(values)) {
  if (values_.size() != layers * dim) {
    throw InvalidArgument("latent: expected " + std::to_string(layers * dim) + " values, got " +
                          std::to_string(values_.size()));
  }
}

std::span<const double> LatentCode::row(std::size_t layer) const {
  return std::span<const double>(values_).subspan(layer * dim_, dim_);
}

std::span<double> LatentCode::row(std::size_t layer) {
  return std::span<double>(values_).subspan(layer * dim_, dim_);
}

bool LatentCode::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SwapList::SwapList(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    if (indices_[i] <= indices_[i - 1]) {
      throw InvalidArgument("swap list must be strictly increasing: " + to_string());
    }
  }
}

SwapList SwapList::parse(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == '[' ||
                               text[i] == ']' || text[i] == ',')) {
      ++i;
    }
  };
  skip();
  while (i < text.size()) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + i) {
      throw InvalidArgument("cannot parse swap list '" + std::string(text) + "'");
    }
    out.push_back(value);
    i = static_cast<std::size_t>(ptr - text.data());
    skip();
  }
  return SwapList(std::move(out));
}

bool SwapList::contains(std::size_t layer) const {
  return std::binary_search(indices_.begin(), indices_.end(), layer);
}

void SwapList::validate_for(std::size_t layers) const {
  if (!indices_.empty() && indices_.back() >= layers) {
    throw InvalidArgument("swap index " + std::to_string(indices_.back()) + " out of range for " +
                          std::to_string(layers) + " layers");
  }
}

SwapList SwapList::truncated_to(std::size_t layers) const {
  std::vector<std::size_t> kept;
  for (auto idx : indices_) {
    if (idx < layers) {
      kept.push_back(idx);
    } else {
      spdlog::warn("swap index {} dropped: generator has {} layers", idx, layers);
    }
  }
  return SwapList(std::move(kept));
}

std::string SwapList::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    os << (i ? ", " : "") << indices_[i];
  }
  os << ']';
  return os.str();
}

SwapList stylegan_default_swap() { return SwapList({7, 9, 11, 15, 16, 17}); }
SwapList toy_default_swap() { return SwapList({3, 4, 5, 7}); }

void MixParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

Decoupled decouple(const LatentCode& w, const SwapList& swap) {
  swap.validate_for(w.layers());
  Decoupled out{LatentCode(w.layers(), w.dim()), LatentCode(w.layers(), w.dim())};
  for (std::size_t k = 0; k < w.layers(); ++k) {
    auto& dst = swap.contains(k) ? out.related : out.independent;
    std::copy_n(w.row(k).begin(), w.dim(), dst.row(k).begin());
  }
  return out;
}

LatentCode mix(const LatentCode& w_s, const LatentCode& w_rand, const MixParams& params) {
  params.validate();
  if (!w_s.same_shape(w_rand)) {
    throw InvalidArgument("mix: latent shapes differ");
  }
  params.swap.validate_for(w_s.layers());
  LatentCode out = w_s;
  const double a = params.alpha;
  const double b = 1.0 - params.alpha;
  for (auto k : params.swap.indices()) {
    auto src = w_s.row(k);
    auto rnd = w_rand.row(k);
    auto dst = out.row(k);
    for (std::size_t j = 0; j < dst.size(); ++j) {
      dst[j] = a * src[j] + b * rnd[j];
    }
  }
  return out;
}

LatentCode sample_random_style(const LatentCode& templ, const SwapList& swap, std::uint64_t seed,
                               const LatentPrior& prior) {
  swap.validate_for(templ.layers());
  LatentCode full = prior.sample_prior(seed);
  if (!full.same_shape(templ)) {
    throw InvalidArgument("prior sample shape does not match template");
  }
  LatentCode out(templ.layers(), templ.dim());
  for (auto k : swap.indices()) {
    std::copy_n(full.row(k).begin(), templ.dim(), out.row(k).begin());
  }
  return out;
}

}  // namespace styleid
