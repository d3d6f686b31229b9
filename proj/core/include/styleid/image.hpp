#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace styleid {

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  std::string to_string() const;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// H x W x C image, interleaved (HWC) storage, nominal range [0, 1].
class Image {
 public:
  Image() = default;
  explicit Image(ImageShape shape, double fill = 0.0);
  Image(ImageShape shape, std::vector<double> pixels);

  const ImageShape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return pixels_.size(); }

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * shape_.width + x) * shape_.channels + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels_[(y * shape_.width + x) * shape_.channels + c];
  }

  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  ImageShape shape_;
  std::vector<double> pixels_;
};

void require_same_shape(const Image& a, const Image& b, const char* what);

double mean_squared_error(const Image& a, const Image& b);

// Elementwise mean of a non-empty set of equally shaped images.
Image mean_image(std::span<const Image> images);

}  // namespace styleid
