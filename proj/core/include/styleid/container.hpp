#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "styleid/generator.hpp"
#include "styleid/latent.hpp"
#include "styleid/toy_generator.hpp"

namespace styleid {

// Latent file: "SIDL1", u32 L, u32 D, L*D f32, all little-endian.
void write_latent(std::ostream& out, const LatentCode& w);
LatentCode read_latent(std::istream& in);
void save_latent(const std::filesystem::path& path, const LatentCode& w);
LatentCode load_latent(const std::filesystem::path& path);

// Weights container: "SIDG1", u32 L, D, H, W, C, u32 count, count f32.
struct WeightsContainer {
  std::uint32_t layers = 0;
  std::uint32_t style_dim = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> values;
};

void write_container(std::ostream& out, const WeightsContainer& c);
WeightsContainer read_container(std::istream& in);
void save_container(const std::filesystem::path& path, const WeightsContainer& c);
WeightsContainer load_container(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const Generator& g);
std::unique_ptr<ToyGenerator> load_checkpoint(const std::filesystem::path& path);

}  // namespace styleid
