#include "manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "styleid/errors.hpp"

namespace styleid::cli {

using nlohmann::json;

std::string tool_version() { return STYLEID_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read for digest: " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

json digests_to_json(const std::vector<FileDigest>& list) {
  json arr = json::array();
  for (const auto& d : list) arr.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return arr;
}

std::vector<FileDigest> digests_from_json(const json& arr) {
  std::vector<FileDigest> out;
  for (const auto& d : arr) out.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string RunManifest::to_json() const {
  json j;
  j["tool"] = "styleid";
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["config"] = settings.values();
  j["backend"] = backend;
  j["seeds"] = {{"train", train_seed}, {"inversion", inversion_seed}, {"perceptual", perceptual_seed}};
  j["inputs"] = digests_to_json(inputs);
  j["outputs"] = digests_to_json(outputs);
  j["timing"] = {{"started_utc", started_utc}, {"seconds", seconds}};
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    const json j = json::parse(text);
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) m.settings.set(k, v.get<std::string>());
    m.backend = j.at("backend").get<std::string>();
    m.train_seed = j.at("seeds").at("train").get<std::uint64_t>();
    m.inversion_seed = j.at("seeds").at("inversion").get<std::uint64_t>();
    m.perceptual_seed = j.at("seeds").at("perceptual").get<std::uint64_t>();
    m.inputs = digests_from_json(j.at("inputs"));
    m.outputs = digests_from_json(j.at("outputs"));
    m.started_utc = j.at("timing").at("started_utc").get<std::string>();
    m.seconds = j.at("timing").at("seconds").get<double>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << to_json();
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace styleid::cli
