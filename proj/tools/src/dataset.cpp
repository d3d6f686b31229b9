#include "dataset.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "styleid/errors.hpp"
#include "styleid/png_io.hpp"

namespace styleid::cli {

namespace fs = std::filesystem;

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetIndex DatasetIndex::pair(const fs::path& photo_dir, const fs::path& portrait_dir,
                                std::string style_label) {
  DatasetIndex idx;
  idx.style_label = std::move(style_label);
  std::map<std::string, fs::path> portraits;
  for (const auto& p : list_pngs(portrait_dir)) portraits[p.stem().string()] = p;
  for (const auto& p : list_pngs(photo_dir)) {
    Entry e{p, std::nullopt};
    if (auto it = portraits.find(p.stem().string()); it != portraits.end()) {
      e.portrait = it->second;
      portraits.erase(it);
    }
    idx.entries.push_back(std::move(e));
  }
  for (auto& [stem, path] : portraits) idx.orphans.push_back(path);
  return idx;
}

Image load_fitted(const fs::path& path, const ImageShape& shape) {
  Image raw = load_png(path);
  if (raw.shape() == shape) return raw;
  const bool aspect_differs = raw.height() * shape.width != raw.width() * shape.height;
  spdlog::info("{}: {} resized to {}{}", path.string(), raw.shape().to_string(), shape.to_string(),
               aspect_differs ? " (center crop)" : "");
  return fit_to_shape(raw, shape);
}

}  // namespace styleid::cli
