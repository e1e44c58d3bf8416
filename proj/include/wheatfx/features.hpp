#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "wheatfx/binary_features.hpp"
#include "wheatfx/error.hpp"
#include "wheatfx/imaging.hpp"
#include "wheatfx/segmentation.hpp"
#include "wheatfx/texture.hpp"

namespace wheatfx {

inline constexpr std::size_t kFeatureCount = kBinaryFeatureCount + kTexturalFeatureCount;
static_assert(kFeatureCount == 28);

/// Fused descriptor: binary block at offsets 0..22, textural block at 23..27.
struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// CSV column names: b00..b22 then t0..t4.
inline const std::vector<std::string>& feature_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    char buf[8];
    for (std::size_t i = 0; i < kBinaryFeatureCount; ++i) {
      std::snprintf(buf, sizeof buf, "b%02zu", i);
      out.emplace_back(buf);
    }
    for (std::size_t i = 0; i < kTexturalFeatureCount; ++i) out.push_back("t" + std::to_string(i));
    return out;
  }();
  return names;
}

[[nodiscard]] inline FeatureVector fuse(const BinaryFeatures& b, const TexturalFeatures& t) {
  FeatureVector out;
  const auto bv = b.to_array();
  const auto tv = t.to_array();
  std::size_t i = 0;
  for (double v : bv) out.values[i++] = v;
  for (double v : tv) out.values[i++] = v;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    if (!std::isfinite(out.values[d])) throw NonFiniteFeature(d);
  }
  return out;
}

struct ExtractionConfig {
  CannyParams canny;
  int seg_threshold = 100;
  GlcmOptions glcm;
  bool glcm_whole_image = false;
  int working_size = kWorkingSize;
};

struct Extraction {
  FeatureVector features;
  GrayImage working;
  BinaryMask mask;
  Roi roi;
  /// Segmentation found no foreground; the whole image was used as object.
  bool roi_fallback = false;
  /// ROI had no pixel pair at the GLCM distance; the whole image was used.
  bool glcm_fallback = false;
};

/// Resize to the working size, threshold, pick the largest component and
/// compute the fused binary + textural descriptor.
[[nodiscard]] inline Extraction extract(const GrayImage& gray, const ExtractionConfig& config = {}) {
  Extraction out;
  out.working = resize_bilinear(gray, config.working_size, config.working_size);
  const int w = out.working.width();
  const int h = out.working.height();
  out.mask = threshold_segment(out.working, config.seg_threshold);

  BinaryObject object;
  BinaryFeatures binary;
  auto objects = connected_components(out.mask);
  if (objects.empty()) {
    out.roi_fallback = true;
    out.roi = whole_image_roi(w, h);
    object.box = out.roi.box;
    object.pixels.reserve(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) object.pixels.push_back({x, y});
    }
    binary = shape_descriptors(object, out.roi.mask);
  } else {
    out.roi = extract_roi(out.mask);
    std::size_t best = 0;
    for (std::size_t i = 1; i < objects.size(); ++i) {
      if (objects[i].size() > objects[best].size()) best = i;
    }
    binary = shape_descriptors(objects[best], out.mask);
  }

  GlcmMatrix glcm = [&] {
    if (config.glcm_whole_image) return compute_glcm(out.working, config.glcm);
    try {
      return compute_glcm(out.working, out.roi, config.glcm);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoValidPairs) throw;
      out.glcm_fallback = true;
      return compute_glcm(out.working, config.glcm);
    }
  }();
  out.features = fuse(binary, textural_features(glcm));
  return out;
}

[[nodiscard]] inline Extraction extract(const RasterImage& image, const ExtractionConfig& config = {}) {
  return extract(to_grayscale(image), config);
}

}  // namespace wheatfx
