#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/imaging.hpp"
#include "wheatfx/segmentation.hpp"

namespace wheatfx {

/// Unit pixel step of a co-occurrence direction; scaled by the distance.
struct Offset {
  int dx = 0;
  int dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// 0, 45, 90 and 135 degrees with y pointing down.
inline const std::vector<Offset>& standard_directions() {
  static const std::vector<Offset> dirs = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
  return dirs;
}

struct GlcmOptions {
  int distance = 5;
  int levels = 16;
  std::vector<Offset> directions = standard_directions();
  bool symmetric = true;
};

/// Quantized intensity bin: floor(v * L / 256).
[[nodiscard]] constexpr int quantize(std::uint8_t v, int levels) noexcept { return v * levels / 256; }

class GlcmMatrix {
 public:
  GlcmMatrix(int levels, std::vector<std::uint64_t> counts, int distance = 1,
             std::vector<Offset> directions = {}, bool symmetric = true)
      : levels_(levels),
        distance_(distance),
        directions_(std::move(directions)),
        symmetric_(symmetric),
        counts_(std::move(counts)) {
    if (levels < 2 || levels > 256) throw Error(ErrorCode::kInvalidArgument, "GLCM levels must be in [2, 256]");
    if (counts_.size() != static_cast<std::size_t>(levels) * levels) {
      throw Error(ErrorCode::kInvalidDimensions, "GLCM counts must be levels x levels");
    }
    for (auto c : counts_) total_ += c;
    if (total_ == 0) throw Error(ErrorCode::kNoValidPairs, "GLCM has no counted pairs");
    probabilities_.resize(counts_.size());
    const auto total = static_cast<double>(total_);
    for (std::size_t i = 0; i < counts_.size(); ++i) probabilities_[i] = static_cast<double>(counts_[i]) / total;
  }

  /// Directly from a probability table (test and analysis use). `p` must be
  /// nonnegative; it is renormalized to sum to one.
  static GlcmMatrix from_probabilities(int levels, std::vector<double> p) {
    GlcmMatrix g(levels);
    if (p.size() != static_cast<std::size_t>(levels) * levels) {
      throw Error(ErrorCode::kInvalidDimensions, "GLCM probabilities must be levels x levels");
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    if (!(sum > 0.0)) throw Error(ErrorCode::kNoValidPairs, "GLCM probabilities are all zero");
    for (double& v : p) v /= sum;
    g.probabilities_ = std::move(p);
    return g;
  }

  [[nodiscard]] int levels() const noexcept { return levels_; }
  [[nodiscard]] int distance() const noexcept { return distance_; }
  [[nodiscard]] const std::vector<Offset>& directions() const noexcept { return directions_; }
  [[nodiscard]] bool symmetric() const noexcept { return symmetric_; }
  [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
  [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  [[nodiscard]] std::uint64_t count(int i, int j) const { return counts_[static_cast<std::size_t>(i) * levels_ + j]; }
  [[nodiscard]] double p(int i, int j) const { return probabilities_[static_cast<std::size_t>(i) * levels_ + j]; }

 private:
  explicit GlcmMatrix(int levels) : levels_(levels) {
    if (levels < 2 || levels > 256) throw Error(ErrorCode::kInvalidArgument, "GLCM levels must be in [2, 256]");
  }

  int levels_;
  int distance_ = 1;
  std::vector<Offset> directions_;
  bool symmetric_ = true;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::vector<double> probabilities_;
};

/// Co-occurrence counts of quantized intensities over pixel pairs that both
/// lie in the ROI mask, summed over all directions at the given distance.
/// Symmetric accumulation counts each pair in both orders. Throws
/// NoValidPairs when no pair fits inside the ROI.
[[nodiscard]] inline GlcmMatrix compute_glcm(const GrayImage& img, const Roi& roi, const GlcmOptions& options = {}) {
  if (options.distance < 1) throw Error(ErrorCode::kInvalidArgument, "GLCM distance must be >= 1");
  if (options.levels < 2 || options.levels > 256) {
    throw Error(ErrorCode::kInvalidArgument, "GLCM levels must be in [2, 256]");
  }
  if (options.directions.empty()) throw Error(ErrorCode::kInvalidArgument, "GLCM needs at least one direction");
  if (roi.mask.width() != img.width() || roi.mask.height() != img.height()) {
    throw Error(ErrorCode::kInvalidDimensions, "ROI mask does not match image size");
  }

  const int levels = options.levels;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
  const Box& box = roi.box;
  for (const Offset& dir : options.directions) {
    const int dx = dir.dx * options.distance;
    const int dy = dir.dy * options.distance;
    for (int y = box.y0; y <= box.y1; ++y) {
      const int ny = y + dy;
      if (ny < box.y0 || ny > box.y1) continue;
      for (int x = box.x0; x <= box.x1; ++x) {
        const int nx = x + dx;
        if (nx < box.x0 || nx > box.x1) continue;
        if (!roi.mask(x, y) || !roi.mask(nx, ny)) continue;
        const int a = quantize(img(x, y), levels);
        const int b = quantize(img(nx, ny), levels);
        ++counts[static_cast<std::size_t>(a) * levels + b];
        if (options.symmetric) ++counts[static_cast<std::size_t>(b) * levels + a];
      }
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) {
    throw Error(ErrorCode::kNoValidPairs,
                "ROI " + std::to_string(box.width()) + "x" + std::to_string(box.height()) +
                    " has no pixel pair at distance " + std::to_string(options.distance));
  }
  return GlcmMatrix(levels, std::move(counts), options.distance, options.directions, options.symmetric);
}

[[nodiscard]] inline GlcmMatrix compute_glcm(const GrayImage& img, const GlcmOptions& options = {}) {
  return compute_glcm(img, whole_image_roi(img.width(), img.height()), options);
}

struct GlcmMarginals {
  double mu_i = 0.0;
  double mu_j = 0.0;
  double sigma_i = 0.0;
  double sigma_j = 0.0;
};

[[nodiscard]] inline GlcmMarginals marginals(const GlcmMatrix& g) {
  const int n = g.levels();
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      row[i] += g.p(i, j);
      col[j] += g.p(i, j);
    }
  }
  GlcmMarginals m;
  for (int i = 0; i < n; ++i) {
    m.mu_i += i * row[i];
    m.mu_j += i * col[i];
  }
  double var_i = 0.0;
  double var_j = 0.0;
  for (int i = 0; i < n; ++i) {
    var_i += (i - m.mu_i) * (i - m.mu_i) * row[i];
    var_j += (i - m.mu_j) * (i - m.mu_j) * col[i];
  }
  m.sigma_i = std::sqrt(var_i);
  m.sigma_j = std::sqrt(var_j);
  return m;
}

inline constexpr std::size_t kTexturalFeatureCount = 5;

struct TexturalFeatures {
  double entropy = 0.0;
  double inertia = 0.0;
  double correlation = 0.0;
  double inverse_difference = 0.0;
  double energy = 0.0;

  [[nodiscard]] std::array<double, kTexturalFeatureCount> to_array() const {
    return {entropy, inertia, correlation, inverse_difference, energy};
  }
};

inline constexpr std::array<std::string_view, kTexturalFeatureCount> kTexturalFeatureNames = {
    "entropy", "inertia", "correlation", "inverse_difference", "energy"};

/// Below this product of marginal standard deviations the correlation is
/// reported as 1.
inline constexpr double kDegenerateSigmaProduct = 1e-12;

/// Entropy (bits), inertia (contrast), Haralick correlation, inverse
/// difference sum P / (1 + |i - j|), and energy (sum of squares).
[[nodiscard]] inline TexturalFeatures textural_features(const GlcmMatrix& g) {
  const GlcmMarginals m = marginals(g);
  const int n = g.levels();
  TexturalFeatures f;
  double covariance = 0.0;
  // sum P / (1 + |d|) == 1 - sum_{d != 0} P |d| / (1 + |d|); the second form is
  // exactly 1 for diagonal-only matrices.
  double off_diagonal_discount = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double p = g.p(i, j);
      if (p <= 0.0) continue;
      const int d = i - j;
      f.entropy -= p * std::log2(p);
      f.inertia += static_cast<double>(d * d) * p;
      covariance += (i - m.mu_i) * (j - m.mu_j) * p;
      if (d != 0) off_diagonal_discount += p * std::abs(d) / (1.0 + std::abs(d));
      f.energy += p * p;
    }
  }
  f.inverse_difference = 1.0 - off_diagonal_discount;
  const double denom = m.sigma_i * m.sigma_j;
  f.correlation = denom < kDegenerateSigmaProduct ? 1.0 : std::clamp(covariance / denom, -1.0, 1.0);
  f.entropy = std::max(f.entropy, 0.0);
  return f;
}

}  // namespace wheatfx
