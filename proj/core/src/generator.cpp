#include "styleid/generator.hpp"

#include <charconv>
#include <functional>
#include <numeric>

#include "styleid/container.hpp"
#include "styleid/errors.hpp"
#include "styleid/toy_generator.hpp"

namespace styleid {

std::size_t ParamSegment::count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

LatentCode Generator::mean_latent(std::size_t n, std::uint64_t seed) const {
  if (n < 1) {
    throw InvalidArgument("mean_latent: n must be >= 1");
  }
  LatentCode acc(layers(), style_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const LatentCode s = sample_prior(seed + i);
    auto dst = acc.values();
    auto src = s.values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  for (auto& v : acc.values()) v /= static_cast<double>(n);
  return acc;
}

void Generator::require_latent_shape(const LatentCode& w) const {
  if (w.layers() != layers() || w.dim() != style_dim()) {
    throw InvalidArgument("latent shape " + std::to_string(w.layers()) + "x" +
                          std::to_string(w.dim()) + " does not match generator " +
                          std::to_string(layers()) + "x" + std::to_string(style_dim()));
  }
}

std::unique_ptr<Generator> make_backend(const std::string& spec) {
  if (spec == "toy") {
    return std::make_unique<ToyGenerator>();
  }
  if (spec.rfind("toy:", 0) == 0) {
    std::uint64_t seed = 0;
    const auto tail = std::string_view(spec).substr(4);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), seed);
    if (ec != std::errc() || ptr != tail.data() + tail.size()) {
      throw InvalidArgument("bad toy backend seed in '" + spec + "'");
    }
    return std::make_unique<ToyGenerator>(ToyGeneratorShape{}, seed);
  }
  if (spec.rfind("checkpoint:", 0) == 0) {
    return load_checkpoint(spec.substr(11));
  }
  throw InvalidArgument("unknown backend '" + spec + "' (expected toy or checkpoint:PATH)");
}

}  // namespace styleid
