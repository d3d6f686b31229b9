#include "styleid/image.hpp"

#include <algorithm>
#include <cmath>

#include "styleid/errors.hpp"

namespace styleid {

std::string ImageShape::to_string() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

Image::Image(ImageShape shape, double fill) : shape_(shape), pixels_(shape.size(), fill) {}

Image::Image(ImageShape shape, std::vector<double> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
  if (pixels_.size() != shape_.size()) {
    throw InvalidArgument("image: " + std::to_string(pixels_.size()) + " values for shape " +
                          shape_.to_string());
  }
}

bool Image::all_finite() const {
  return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + a.shape().to_string() +
                          " vs " + b.shape().to_string());
  }
}

double mean_squared_error(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return pa.empty() ? 0.0 : acc / static_cast<double>(pa.size());
}

Image mean_image(std::span<const Image> images) {
  if (images.empty()) {
    throw InvalidArgument("mean_image: empty set");
  }
  Image out(images.front().shape());
  for (const auto& img : images) {
    require_same_shape(out, img, "mean_image");
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  for (auto& v : out.pixels()) v /= static_cast<double>(images.size());
  return out;
}

}  // namespace styleid
