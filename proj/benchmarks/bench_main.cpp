#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "styleid/metrics.hpp"
#include "styleid/perceptual.hpp"
#include "styleid/toy_generator.hpp"

using namespace styleid;

namespace {

Image noise_image(const ImageShape& shape, unsigned seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> n(0.5, 0.2);
  Image img(shape);
  for (auto& p : img.pixels()) p = std::clamp(n(eng), 0.0, 1.0);
  return img;
}

void BM_Synthesize(benchmark::State& state) {
  const ToyGenerator g;
  const LatentCode w = g.sample_prior(1);
  for (auto _ : state) benchmark::DoNotOptimize(g.synthesize(w));
}
BENCHMARK(BM_Synthesize);

void BM_SynthesizeBackward(benchmark::State& state) {
  const ToyGenerator g;
  const LatentCode w = g.sample_prior(1);
  const Image grad = noise_image(g.output_shape(), 2);
  LatentCode gw(w.layers(), w.dim());
  std::vector<double> gp(g.params().size());
  for (auto _ : state) {
    g.backward(w, grad, &gw, gp);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_SynthesizeBackward);

void BM_PerceptualDistance(benchmark::State& state) {
  const FeatureStack fs = FeatureStack::seeded({32, 32, 3}, 1234);
  const Image a = noise_image({32, 32, 3}, 1);
  const Image b = noise_image({32, 32, 3}, 2);
  Image grad;
  for (auto _ : state) benchmark::DoNotOptimize(fs.distance(a, b, grad));
}
BENCHMARK(BM_PerceptualDistance);

void BM_FrechetDistance(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(3);
  std::normal_distribution<double> n;
  std::vector<std::vector<double>> fa(4 * k, std::vector<double>(k)), fb = fa;
  for (auto& v : fa) std::generate(v.begin(), v.end(), [&] { return n(eng); });
  for (auto& v : fb) std::generate(v.begin(), v.end(), [&] { return 0.3 + n(eng); });
  const auto a = fit_gaussian(fa);
  const auto b = fit_gaussian(fb);
  for (auto _ : state) benchmark::DoNotOptimize(frechet_distance(a, b));
}
BENCHMARK(BM_FrechetDistance)->Arg(40)->Arg(128)->Arg(512);

void BM_Ssim(benchmark::State& state) {
  const Image a = noise_image({256, 256, 3}, 4);
  const Image b = noise_image({256, 256, 3}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim);

}  // namespace

BENCHMARK_MAIN();
