#pragma once

#include <filesystem>

#include "styleid/image.hpp"

namespace styleid {

// 8/16-bit gray, gray+alpha, RGB or RGBA in; alpha is dropped and gray is
// kept single-channel.
Image load_png(const std::filesystem::path& path);

// 8-bit output; values are clamped to [0, 1] and rounded.
void save_png(const std::filesystem::path& path, const Image& image);

// Bilinear resample after a center crop to the target aspect ratio.
// Channel count is adapted (gray -> replicated, RGB -> luma).
Image fit_to_shape(const Image& image, const ImageShape& target);

}  // namespace styleid
