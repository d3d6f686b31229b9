#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "styleid/errors.hpp"
#include "styleid/metrics.hpp"
#include "styleid/sample_data.hpp"

using namespace styleid;

namespace {

GaussianStats stats(std::vector<double> mean, std::vector<double> cov) {
  GaussianStats s;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.count = 100;
  return s;
}

std::vector<double> diagonal(const std::vector<double>& d) {
  std::vector<double> m(d.size() * d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) m[i * d.size() + i] = d[i];
  return m;
}

Image random_image(const ImageShape& shape, std::uint64_t seed) {
  oracle::Normal rng(seed);
  Image img(shape);
  for (auto& v : img.pixels()) v = std::clamp(0.5 + 0.25 * rng(), 0.0, 1.0);
  return img;
}

}  // namespace

TEST_CASE("fit_gaussian on hand-sized inputs") {
  const std::vector<std::vector<double>> two{{0, 0}, {2, 0}};
  const auto s = fit_gaussian(two);
  CHECK(s.mean == std::vector<double>{1, 0});
  CHECK(s.cov == std::vector<double>{2, 0, 0, 0});
  CHECK(s.count == 2);

  const std::vector<std::vector<double>> same{{1.5, -2}, {1.5, -2}};
  CHECK(fit_gaussian(same).cov == std::vector<double>(4, 0.0));
}

TEST_CASE("fit_gaussian ignores sample order") {
  oracle::Normal rng(3);
  std::vector<std::vector<double>> f(50, std::vector<double>(6));
  for (auto& v : f) {
    for (auto& x : v) x = rng();
  }
  const auto a = fit_gaussian(f);
  std::reverse(f.begin(), f.end());
  std::rotate(f.begin(), f.begin() + 17, f.end());
  const auto b = fit_gaussian(f);
  CHECK(a.mean == b.mean);
  CHECK(a.cov == b.cov);
}

TEST_CASE("fit_gaussian input checks") {
  const std::vector<std::vector<double>> one{{1, 2}};
  CHECK_THROWS_AS(fit_gaussian(one), InvalidArgument);
  const std::vector<std::vector<double>> ragged{{1, 2}, {1}};
  CHECK_THROWS_AS(fit_gaussian(ragged), InvalidArgument);
}

TEST_CASE("frechet distance closed forms") {
  const std::vector<double> d{0.3, -1.2, 2.0, 0.0, 0.7};
  const double d2 = 0.09 + 1.44 + 4.0 + 0.49;
  const auto eye = diagonal(std::vector<double>(5, 1.0));
  CHECK(std::abs(frechet_distance(stats(std::vector<double>(5, 0.0), eye), stats(d, eye)) - d2) < 1e-8);

  const std::vector<double> s1{0.5, 1.0, 2.0, 0.1};
  const std::vector<double> s2{1.5, 0.2, 2.0, 0.9};
  double expected = 0.0;
  for (std::size_t k = 0; k < 4; ++k) expected += (s1[k] - s2[k]) * (s1[k] - s2[k]);
  std::vector<double> v1, v2;
  for (std::size_t k = 0; k < 4; ++k) {
    v1.push_back(s1[k] * s1[k]);
    v2.push_back(s2[k] * s2[k]);
  }
  const std::vector<double> mu{1, 2, 3, 4};
  CHECK(std::abs(frechet_distance(stats(mu, diagonal(v1)), stats(mu, diagonal(v2))) - expected) < 1e-8);
}

TEST_CASE("frechet distance to itself vanishes and is symmetric") {
  for (std::size_t k : {2u, 7u, 16u, 40u}) {
    const auto a = stats(std::vector<double>(k, 0.5), oracle::random_spd(k, k));
    const auto b = stats(std::vector<double>(k, -0.25), oracle::random_spd(k, 100 + k));
    CHECK(std::abs(frechet_distance(a, a)) < 1e-6);
    const double ab = frechet_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - frechet_distance(b, a)) < 1e-8);
  }
  CHECK_THROWS_AS(frechet_distance(stats({0, 0}, diagonal({1, 1})), stats({0}, {1})), InvalidArgument);
}

TEST_CASE("matrix square root reconstructs its input") {
  for (std::size_t k : {1u, 2u, 5u, 16u, 33u, 64u}) {
    const auto m = oracle::random_spd(k, 7 * k, 1e-3, 10.0);
    const auto r = sqrtm_psd(m, k);
    const auto sq = oracle::matmul(r, r, k);
    std::vector<double> diff(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) diff[i] = sq[i] - m[i];
    CAPTURE(k);
    CHECK(oracle::frobenius(diff) / oracle::frobenius(m) < 1e-6);
  }
}

TEST_CASE("fid of a set against itself is zero") {
  const FeatureStack fs = FeatureStack::seeded({16, 16, 3}, 1);
  std::vector<Image> set;
  for (std::uint64_t i = 0; i < 12; ++i) set.push_back(random_image({16, 16, 3}, i));
  CHECK(std::abs(fid_score(set, set, fs)) < 1e-6);
  CHECK_THROWS_AS(fid_score(std::span(set).first(1), set, fs), InvalidArgument);
}

TEST_CASE("fid through a linear probe matches the analytic feature Gaussians") {
  const ImageShape shape{16, 16, 3};
  const std::size_t n = 512;
  const double mean_a[] = {0.30, 0.50, 0.70};
  const double mean_b[] = {0.60, 0.40, 0.45};
  const double off_a = 0.02, off_b = 0.04, noise = 0.05;
  const auto a = make_constant_noise_set(shape, n, mean_a, off_a, noise, 1);
  const auto b = make_constant_noise_set(shape, n, mean_b, off_b, noise, 2);
  const FeatureStack probe = linear_probe_stack(shape, 4, 7);

  // Pooled features are W m + bias with m the per-channel pixel mean, so
  // each set maps to N(W mu, v W W^T), v = offset^2 + noise^2 / (H W).
  const auto& st = probe.stages()[0];
  const double pixels = static_cast<double>(shape.height * shape.width);
  const double va = off_a * off_a + noise * noise / pixels;
  const double vb = off_b * off_b + noise * noise / pixels;
  double mean_term = 0.0, trace_wwt = 0.0;
  for (std::size_t o = 0; o < 4; ++o) {
    double dm = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      dm += st.weights[o * 3 + c] * (mean_a[c] - mean_b[c]);
      trace_wwt += st.weights[o * 3 + c] * st.weights[o * 3 + c];
    }
    mean_term += dm * dm;
  }
  // Tr(va WW^T + vb WW^T - 2 sqrt(va vb) WW^T).
  const double expected = mean_term + (std::sqrt(va) - std::sqrt(vb)) * (std::sqrt(va) - std::sqrt(vb)) * trace_wwt;
  const double fid = fid_score(a, b, probe);
  CHECK(std::abs(fid - expected) < 0.05 * expected);
}

TEST_CASE("ssim of an image with itself is exactly one") {
  for (std::uint64_t t = 0; t < 5; ++t) {
    const Image img = random_image({20, 24, 3}, t);
    CHECK(ssim(img, img) == 1.0);
  }
}

TEST_CASE("ssim of constant images follows the luminance formula") {
  for (double mu1 : {0.0, 0.2, 0.5, 0.9}) {
    for (double mu2 : {0.1, 0.5, 1.0}) {
      const double got = ssim(Image({12, 12, 3}, mu1), Image({12, 12, 3}, mu2));
      CHECK(std::abs(got - oracle::ssim_constant(mu1, mu2, 0.01, 1.0)) < 1e-10);
    }
  }
  SsimOptions wide;
  wide.data_range = 255.0;
  CHECK(std::abs(ssim(Image({9, 9, 1}, 40.0), Image({9, 9, 1}, 200.0), wide) -
                 oracle::ssim_constant(40.0, 200.0, 0.01, 255.0)) < 1e-10);
}

TEST_CASE("ssim stays within [-1, 1]") {
  for (std::uint64_t t = 0; t < 40; ++t) {
    Image a = random_image({16, 16, 3}, 2 * t);
    Image b = random_image({16, 16, 3}, 2 * t + 1);
    if (t % 2 == 0) {
      for (std::size_t i = 0; i < b.size(); ++i) b.pixels()[i] = 1.0 - a.pixels()[i];
    }
    const double v = ssim(a, b);
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("ssim argument checks") {
  const Image a({8, 8, 3});
  CHECK_THROWS_AS(ssim(a, Image({8, 9, 3})), InvalidArgument);
  SsimOptions even;
  even.window = 4;
  CHECK_THROWS_AS(ssim(a, a, even), InvalidArgument);
  SsimOptions big;
  big.window = 9;
  CHECK_THROWS_AS(ssim(a, a, big), InvalidArgument);
}
