#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "styleid/image.hpp"
#include "styleid/perceptual.hpp"

namespace styleid {

struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> cov;  // K x K, row-major
  std::size_t count = 0;

  std::size_t dim() const { return mean.size(); }
};

/// Sample mean and covariance (denominator n - 1).
GaussianStats fit_gaussian(std::span<const std::vector<double>> features);

/// Square root of a symmetric positive-semidefinite K x K matrix
/// (row-major) via eigendecomposition; negative eigenvalues are clipped.
std::vector<double> sqrtm_psd(std::span<const double> matrix, std::size_t dim);

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

double fid_score(std::span<const Image> images_a, std::span<const Image> images_b,
                 const FeatureExtractor& extractor);

struct SsimOptions {
  std::size_t window = 7;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

/// Mean SSIM over every valid window position and channel, uniform
/// window, population statistics.
double ssim(const Image& a, const Image& b, const SsimOptions& opts = {});

}  // namespace styleid
