#include "styleid/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "styleid/errors.hpp"

namespace styleid {

Image load_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const ImageShape shape{img.height, img.width, color ? 3u : 1u};
  std::vector<double> pixels(buf.size());
  std::transform(buf.begin(), buf.end(), pixels.begin(),
                 [](png_byte b) { return static_cast<double>(b) / 255.0; });
  return Image(shape, std::move(pixels));
}

void save_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw InvalidArgument("save_png: only 1 or 3 channel images are supported");
  }
  std::vector<png_byte> buf(image.size());
  auto src = image.pixels();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const double v = std::clamp(src[i], 0.0, 1.0);
    buf[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

Image fit_to_shape(const Image& image, const ImageShape& target) {
  if (image.size() == 0 || target.size() == 0) {
    throw InvalidArgument("fit_to_shape: empty image or target");
  }
  // Center crop to the target aspect ratio.
  const double src_aspect = static_cast<double>(image.width()) / static_cast<double>(image.height());
  const double dst_aspect = static_cast<double>(target.width) / static_cast<double>(target.height);
  double crop_w = static_cast<double>(image.width());
  double crop_h = static_cast<double>(image.height());
  if (src_aspect > dst_aspect) {
    crop_w = crop_h * dst_aspect;
  } else if (src_aspect < dst_aspect) {
    crop_h = crop_w / dst_aspect;
  }
  const double x_off = (static_cast<double>(image.width()) - crop_w) / 2.0;
  const double y_off = (static_cast<double>(image.height()) - crop_h) / 2.0;
  const double sx = crop_w / static_cast<double>(target.width);
  const double sy = crop_h / static_cast<double>(target.height);

  auto sample = [&](double fy, double fx, std::size_t c) {
    const double y = std::clamp(fy, 0.0, static_cast<double>(image.height() - 1));
    const double x = std::clamp(fx, 0.0, static_cast<double>(image.width() - 1));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
    const double ty = y - static_cast<double>(y0);
    const double tx = x - static_cast<double>(x0);
    const double top = (1 - tx) * image.at(y0, x0, c) + tx * image.at(y0, x1, c);
    const double bot = (1 - tx) * image.at(y1, x0, c) + tx * image.at(y1, x1, c);
    return (1 - ty) * top + ty * bot;
  };
  auto read = [&](double fy, double fx, std::size_t c) {
    if (image.channels() == target.channels) return sample(fy, fx, c);
    if (image.channels() == 1) return sample(fy, fx, 0);
    if (target.channels == 1 && image.channels() >= 3) {
      return 0.299 * sample(fy, fx, 0) + 0.587 * sample(fy, fx, 1) + 0.114 * sample(fy, fx, 2);
    }
    throw InvalidArgument("fit_to_shape: cannot map " + std::to_string(image.channels()) +
                          " channels to " + std::to_string(target.channels));
  };

  Image out(target);
  for (std::size_t y = 0; y < target.height; ++y) {
    const double fy = y_off + (static_cast<double>(y) + 0.5) * sy - 0.5;
    for (std::size_t x = 0; x < target.width; ++x) {
      const double fx = x_off + (static_cast<double>(x) + 0.5) * sx - 0.5;
      for (std::size_t c = 0; c < target.channels; ++c) out.at(y, x, c) = read(fy, fx, c);
    }
  }
  return out;
}

}  // namespace styleid
