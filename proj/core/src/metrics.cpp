#include "styleid/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "styleid/errors.hpp"

namespace styleid {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kClipWarnThreshold = -1e-6;

Eigen::Map<const Matrix> view(std::span<const double> m, std::size_t dim) {
  return {m.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)};
}

Eigen::SelfAdjointEigenSolver<Matrix> symmetric_eigen(const Matrix& m, const char* what) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure(std::string(what) + ": eigendecomposition did not converge");
  }
  return solver;
}

double clipped_sqrt(double lambda, const char* what) {
  if (lambda < 0.0) {
    if (lambda < kClipWarnThreshold) {
      spdlog::warn("{}: clipping eigenvalue {} to zero", what, lambda);
    }
    return 0.0;
  }
  return std::sqrt(lambda);
}

}  // namespace

GaussianStats fit_gaussian(std::span<const std::vector<double>> features) {
  if (features.size() < 2) {
    throw InvalidArgument("fit_gaussian: at least two feature vectors are required");
  }
  const std::size_t k = features.front().size();
  for (const auto& f : features) {
    if (f.size() != k) throw InvalidArgument("fit_gaussian: feature vectors differ in length");
  }
  // Accumulate in lexicographic order so the result does not depend on
  // the order of the input.
  std::vector<const std::vector<double>*> order;
  order.reserve(features.size());
  for (const auto& f : features) order.push_back(&f);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return *a < *b; });

  GaussianStats st;
  st.count = features.size();
  st.mean.assign(k, 0.0);
  for (const auto* f : order) {
    for (std::size_t i = 0; i < k; ++i) st.mean[i] += (*f)[i];
  }
  for (auto& m : st.mean) m /= static_cast<double>(st.count);

  st.cov.assign(k * k, 0.0);
  std::vector<double> centered(k);
  for (const auto* f : order) {
    for (std::size_t i = 0; i < k; ++i) centered[i] = (*f)[i] - st.mean[i];
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) st.cov[i * k + j] += centered[i] * centered[j];
    }
  }
  const double denom = static_cast<double>(st.count - 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      st.cov[i * k + j] /= denom;
      st.cov[j * k + i] = st.cov[i * k + j];
    }
  }
  return st;
}

std::vector<double> sqrtm_psd(std::span<const double> matrix, std::size_t dim) {
  if (matrix.size() != dim * dim) throw InvalidArgument("sqrtm_psd: matrix is not dim x dim");
  const auto solver = symmetric_eigen(view(matrix, dim), "sqrtm_psd");
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) roots[i] = clipped_sqrt(roots[i], "sqrtm_psd");
  const Matrix& v = solver.eigenvectors();
  const Matrix out = v * roots.asDiagonal() * v.transpose();
  return {out.data(), out.data() + out.size()};
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  const std::size_t k = a.dim();
  if (b.dim() != k || a.cov.size() != k * k || b.cov.size() != k * k) {
    throw InvalidArgument("frechet_distance: dimension mismatch");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = a.mean[i] - b.mean[i];
    mean_term += d * d;
  }
  const std::vector<double> root_a = sqrtm_psd(a.cov, k);
  const Matrix product = view(root_a, k) * view(b.cov, k) * view(root_a, k);
  const auto solver = symmetric_eigen(product, "frechet_distance");
  double trace_root = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    trace_root += clipped_sqrt(solver.eigenvalues()[i], "frechet_distance");
  }
  const double d = mean_term + view(a.cov, k).trace() + view(b.cov, k).trace() - 2.0 * trace_root;
  return std::max(d, 0.0);
}

double fid_score(std::span<const Image> images_a, std::span<const Image> images_b,
                 const FeatureExtractor& extractor) {
  if (images_a.size() < 2 || images_b.size() < 2) {
    throw InvalidArgument("fid_score: each image set needs at least two images");
  }
  auto extract = [&](std::span<const Image> set) {
    std::vector<std::vector<double>> feats;
    feats.reserve(set.size());
    for (const auto& img : set) feats.push_back(extractor.pooled_features(img));
    return feats;
  };
  const auto fa = extract(images_a);
  const auto fb = extract(images_b);
  return frechet_distance(fit_gaussian(fa), fit_gaussian(fb));
}

double ssim(const Image& a, const Image& b, const SsimOptions& opts) {
  require_same_shape(a, b, "ssim");
  const std::size_t win = opts.window;
  if (win == 0 || win % 2 == 0) throw InvalidArgument("ssim: window must be odd");
  if (win > a.height() || win > a.width()) {
    throw InvalidArgument("ssim: window larger than image");
  }
  if (!(opts.data_range > 0.0)) throw InvalidArgument("ssim: data_range must be positive");
  const double c1 = (opts.k1 * opts.data_range) * (opts.k1 * opts.data_range);
  const double c2 = (opts.k2 * opts.data_range) * (opts.k2 * opts.data_range);
  const double npix = static_cast<double>(win * win);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    for (std::size_t y0 = 0; y0 + win <= a.height(); ++y0) {
      for (std::size_t x0 = 0; x0 + win <= a.width(); ++x0) {
        double mu_a = 0.0, mu_b = 0.0;
        for (std::size_t y = y0; y < y0 + win; ++y) {
          for (std::size_t x = x0; x < x0 + win; ++x) {
            mu_a += a.at(y, x, c);
            mu_b += b.at(y, x, c);
          }
        }
        mu_a /= npix;
        mu_b /= npix;
        double var_a = 0.0, var_b = 0.0, cov = 0.0;
        for (std::size_t y = y0; y < y0 + win; ++y) {
          for (std::size_t x = x0; x < x0 + win; ++x) {
            const double da = a.at(y, x, c) - mu_a;
            const double db = b.at(y, x, c) - mu_b;
            var_a += da * da;
            var_b += db * db;
            cov += da * db;
          }
        }
        var_a /= npix;
        var_b /= npix;
        cov /= npix;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        total += num / den;
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace styleid
