#include "styleid/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "styleid/errors.hpp"

namespace styleid {

namespace {

constexpr char kLatentMagic[5] = {'S', 'I', 'D', 'L', '1'};
constexpr char kWeightsMagic[5] = {'S', 'I', 'D', 'G', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IoError("unexpected end of file");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

void expect_magic(std::istream& in, const char (&magic)[5]) {
  char got[5];
  if (!in.read(got, 5) || std::memcmp(got, magic, 5) != 0) {
    throw IoError(std::string("bad magic, expected ") + std::string(magic, 5));
  }
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) {
    throw InvalidArgument(std::string(what) + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

void write_latent(std::ostream& out, const LatentCode& w) {
  out.write(kLatentMagic, 5);
  put_u32(out, checked_u32(w.layers(), "layer count"));
  put_u32(out, checked_u32(w.dim(), "style dim"));
  for (double v : w.values()) put_f32(out, static_cast<float>(v));
}

LatentCode read_latent(std::istream& in) {
  expect_magic(in, kLatentMagic);
  const std::uint32_t layers = get_u32(in);
  const std::uint32_t dim = get_u32(in);
  std::vector<double> values(static_cast<std::size_t>(layers) * dim);
  for (auto& v : values) v = get_f32(in);
  LatentCode w(layers, dim, std::move(values));
  if (!w.all_finite()) throw IoError("latent file contains non-finite values");
  return w;
}

void save_latent(const std::filesystem::path& path, const LatentCode& w) {
  auto out = open_out(path);
  write_latent(out, w);
  if (!out) throw IoError("write failed: " + path.string());
}

LatentCode load_latent(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_latent(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_container(std::ostream& out, const WeightsContainer& c) {
  out.write(kWeightsMagic, 5);
  put_u32(out, c.layers);
  put_u32(out, c.style_dim);
  put_u32(out, c.height);
  put_u32(out, c.width);
  put_u32(out, c.channels);
  put_u32(out, checked_u32(c.values.size(), "parameter count"));
  for (float v : c.values) put_f32(out, v);
}

WeightsContainer read_container(std::istream& in) {
  expect_magic(in, kWeightsMagic);
  WeightsContainer c;
  c.layers = get_u32(in);
  c.style_dim = get_u32(in);
  c.height = get_u32(in);
  c.width = get_u32(in);
  c.channels = get_u32(in);
  const std::uint32_t count = get_u32(in);
  c.values.resize(count);
  for (auto& v : c.values) {
    v = get_f32(in);
    if (!std::isfinite(v)) throw IoError("weights contain non-finite values");
  }
  return c;
}

void save_container(const std::filesystem::path& path, const WeightsContainer& c) {
  auto out = open_out(path);
  write_container(out, c);
  if (!out) throw IoError("write failed: " + path.string());
}

WeightsContainer load_container(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_container(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Generator& g) {
  const ImageShape s = g.output_shape();
  WeightsContainer c;
  c.layers = checked_u32(g.layers(), "layer count");
  c.style_dim = checked_u32(g.style_dim(), "style dim");
  c.height = checked_u32(s.height, "height");
  c.width = checked_u32(s.width, "width");
  c.channels = checked_u32(s.channels, "channels");
  c.values.reserve(g.params().size());
  for (double v : g.params()) c.values.push_back(static_cast<float>(v));
  save_container(path, c);
}

std::unique_ptr<ToyGenerator> load_checkpoint(const std::filesystem::path& path) {
  const WeightsContainer c = load_container(path);
  const ToyGeneratorShape shape{c.layers, c.style_dim, c.height, c.width, c.channels};
  if (c.values.size() != ToyGenerator::param_count(shape)) {
    throw IoError(path.string() + ": parameter count " + std::to_string(c.values.size()) +
                  " does not match the declared generator shape");
  }
  try {
    return std::make_unique<ToyGenerator>(shape,
                                          std::vector<double>(c.values.begin(), c.values.end()));
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace styleid
