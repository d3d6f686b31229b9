#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace styleid::cli {

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Everything needed to re-run a command bit-identically.
struct RunManifest {
  std::string tool_version;
  std::string command;
  Settings settings;  // fully resolved, after defaults/file/env/flags
  std::string backend;
  std::uint64_t train_seed = 0;
  std::uint64_t inversion_seed = 0;
  std::uint64_t perceptual_seed = 0;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;  // relative to the output location
  std::string started_utc;
  double seconds = 0.0;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();
std::string tool_version();

}  // namespace styleid::cli
