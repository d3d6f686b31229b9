#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "styleid/image.hpp"

namespace styleid::cli {

/// Photos paired with optional portraits by shared file stem.
struct DatasetIndex {
  struct Entry {
    std::filesystem::path photo;
    std::optional<std::filesystem::path> portrait;
  };
  std::string style_label;
  std::vector<Entry> entries;

  // Unpaired portraits (stems without a matching photo).
  std::vector<std::filesystem::path> orphans;

  static DatasetIndex pair(const std::filesystem::path& photo_dir,
                           const std::filesystem::path& portrait_dir, std::string style_label);
};

/// Sorted list of *.png files; IoError if the directory is missing.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

/// Loads a PNG and fits it to `shape` (center crop + bilinear), logging
/// when a resize or crop happens.
Image load_fitted(const std::filesystem::path& path, const ImageShape& shape);

}  // namespace styleid::cli
