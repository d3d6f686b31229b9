#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "styleid/inversion.hpp"
#include "styleid/trainer.hpp"

namespace styleid::cli {

// Bad flag combinations or missing required inputs; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value settings. Later layers override earlier ones:
/// built-in defaults, config file, STYLEID_SEED, command-line flags.
class Settings {
 public:
  static Settings defaults();

  // One key per line, '#' starts a comment, blank lines ignored.
  static Settings parse(std::string_view text, const std::string& origin);
  static Settings from_file(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  void merge(const Settings& over);
  bool has(const std::string& key) const;
  void erase(const std::string& key);

  std::string get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Applies STYLEID_SEED from the environment, if set.
void apply_seed_env(Settings& s);

TrainConfig train_config_from(const Settings& s, const Generator& g);
InversionOptions inversion_options_from(const Settings& s);

}  // namespace styleid::cli
