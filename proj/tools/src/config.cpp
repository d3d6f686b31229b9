#include "config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "styleid/errors.hpp"

namespace styleid::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Settings Settings::defaults() {
  Settings s;
  s.set("alpha", "0.5");
  s.set("lambda_feature", "0.001");
  s.set("profile", "sketch");
  s.set("step_size", "0.3");
  s.set("seed", "0");
  s.set("resample_rand", "true");
  s.set("backend", "toy");
  s.set("inv_steps", "300");
  s.set("inv_step_size", "4");
  s.set("inv_perceptual_weight", "1");
  s.set("inv_pixel_weight", "0.1");
  s.set("inv_seed", "0");
  s.set("inv_mean_samples", "4096");
  s.set("perc_seed", "1234");
  return s;
}

Settings Settings::parse(std::string_view text, const std::string& origin) {
  Settings s;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    s.set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  return s;
}

Settings Settings::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Settings::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

void Settings::merge(const Settings& over) {
  for (const auto& [k, v] : over.values_) values_[k] = v;
}

bool Settings::has(const std::string& key) const { return values_.count(key) != 0; }
void Settings::erase(const std::string& key) { values_.erase(key); }

std::optional<std::string> Settings::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Settings::get(const std::string& key) const {
  auto v = find(key);
  if (!v) throw UsageError("missing setting '" + key + "'");
  return *v;
}

double Settings::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("setting '" + key + "' is not a number: '" + v + "'");
  }
}

std::uint64_t Settings::get_u64(const std::string& key) const {
  const std::string v = get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("setting '" + key + "' is not a non-negative integer: '" + v + "'");
  }
  return out;
}

bool Settings::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("setting '" + key + "' is not a boolean: '" + v + "'");
}

std::string Settings::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

void apply_seed_env(Settings& s) {
  if (const char* env = std::getenv("STYLEID_SEED"); env != nullptr && *env != '\0') {
    s.set("seed", env);
  }
}

TrainConfig train_config_from(const Settings& s, const Generator& g) {
  TrainConfig cfg;
  const std::string profile = s.get("profile");
  if (profile == "sketch") {
    cfg = TrainConfig::sketch_profile();
  } else if (profile == "cartoon") {
    cfg = TrainConfig::cartoon_profile();
  } else {
    throw UsageError("unknown profile '" + profile + "' (sketch or cartoon)");
  }
  cfg.alpha = s.get_double("alpha");
  cfg.lambda_feature = s.get_double("lambda_feature");
  if (s.has("epochs")) cfg.epochs = s.get_u64("epochs");
  cfg.step_size = s.get_double("step_size");
  cfg.seed = s.get_u64("seed");
  cfg.resample_rand_each_epoch = s.get_bool("resample_rand");
  try {
    cfg.swap = s.has("swap_list") ? SwapList::parse(s.get("swap_list")) : default_swap_for(g);
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

InversionOptions inversion_options_from(const Settings& s) {
  InversionOptions o;
  o.steps = s.get_u64("inv_steps");
  o.step_size = s.get_double("inv_step_size");
  o.perceptual_weight = s.get_double("inv_perceptual_weight");
  o.pixel_weight = s.get_double("inv_pixel_weight");
  o.seed = s.get_u64("inv_seed");
  o.mean_samples = s.get_u64("inv_mean_samples");
  try {
    o.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return o;
}

}  // namespace styleid::cli
