#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "wheatfx/components.hpp"

namespace wheatfx {

inline constexpr int kProjectionGrid = 8;
inline constexpr std::size_t kBinaryFeatureCount = 23;

/// Shape descriptors of one object. Layout of to_array():
///   0..7   row projections (fraction of occupied cells per 8x8 grid row)
///   8..15  column projections
///   16     area fraction, 17 aspect ratio (height / width)
///   18, 19 centroid x, y normalized by image width, height
///   20     Euler number, 21 thinness, 22 orientation in radians
struct BinaryFeatures {
  std::array<double, kProjectionGrid> row_projections{};
  std::array<double, kProjectionGrid> column_projections{};
  double area_fraction = 0.0;
  double aspect_ratio = 0.0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  int euler = 0;
  double thinness = 0.0;
  double orientation = 0.0;

  [[nodiscard]] std::array<double, kBinaryFeatureCount> to_array() const {
    std::array<double, kBinaryFeatureCount> out{};
    for (int i = 0; i < kProjectionGrid; ++i) {
      out[i] = row_projections[i];
      out[kProjectionGrid + i] = column_projections[i];
    }
    out[16] = area_fraction;
    out[17] = aspect_ratio;
    out[18] = centroid_x;
    out[19] = centroid_y;
    out[20] = euler;
    out[21] = thinness;
    out[22] = orientation;
    return out;
  }
};

inline constexpr std::array<std::string_view, kBinaryFeatureCount> kBinaryFeatureNames = {
    "row_proj_0", "row_proj_1", "row_proj_2", "row_proj_3", "row_proj_4", "row_proj_5",
    "row_proj_6", "row_proj_7", "col_proj_0", "col_proj_1", "col_proj_2", "col_proj_3",
    "col_proj_4", "col_proj_5", "col_proj_6", "col_proj_7", "area_fraction", "aspect_ratio",
    "centroid_x", "centroid_y", "euler_number", "thinness", "orientation"};

/// Bounding-box height over width.
[[nodiscard]] inline double aspect_ratio(const BinaryObject& obj) {
  return static_cast<double>(obj.height()) / obj.width();
}

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

/// Mean pixel coordinate (column, row).
[[nodiscard]] inline Centroid centroid(const BinaryObject& obj) {
  std::int64_t sx = 0;
  std::int64_t sy = 0;
  for (const Point& p : obj.pixels) {
    sx += p.x;
    sy += p.y;
  }
  const auto n = static_cast<double>(obj.size());
  return {static_cast<double>(sx) / n, static_cast<double>(sy) / n};
}

/// Axis of least second moment, 0.5 * atan2(2 mu11, mu20 - mu02), with x
/// along columns and y along rows (downward). Range (-pi/2, pi/2]; a
/// horizontal line gives 0 and a vertical line gives pi/2. Moments are
/// accumulated in integers (scaled by N^2) so the angle is exactly
/// translation invariant.
[[nodiscard]] inline double orientation(const BinaryObject& obj) {
  std::int64_t sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const Point& p : obj.pixels) {
    sx += p.x;
    sy += p.y;
    sxx += static_cast<std::int64_t>(p.x) * p.x;
    syy += static_cast<std::int64_t>(p.y) * p.y;
    sxy += static_cast<std::int64_t>(p.x) * p.y;
  }
  const auto n = static_cast<std::int64_t>(obj.size());
  const std::int64_t mu20 = n * sxx - sx * sx;
  const std::int64_t mu02 = n * syy - sy * sy;
  const std::int64_t mu11 = n * sxy - sx * sy;
  if (mu11 == 0 && mu20 == mu02) return 0.0;
  // +0.0 keeps atan2 on the (-pi, pi] branch when mu11 is zero.
  return 0.5 * std::atan2(static_cast<double>(2 * mu11) + 0.0, static_cast<double>(mu20 - mu02));
}

/// Object pixels with at least one 4-neighbour outside the object (the image
/// border counts as outside).
[[nodiscard]] inline std::size_t perimeter_pixels(const BinaryObject& obj) {
  BinaryMask local(obj.width(), obj.height());
  for (const Point& p : obj.pixels) local.set(p.x - obj.box.x0, p.y - obj.box.y0, true);
  std::size_t count = 0;
  for (const Point& p : obj.pixels) {
    const int x = p.x - obj.box.x0;
    const int y = p.y - obj.box.y0;
    if (!local.test(x - 1, y) || !local.test(x + 1, y) || !local.test(x, y - 1) || !local.test(x, y + 1)) ++count;
  }
  return count;
}

/// Isoperimetric ratio 4*pi*N / P^2. A single pixel has P = 4.
[[nodiscard]] inline double thinness(const BinaryObject& obj) {
  const double p = obj.size() == 1 ? 4.0 : static_cast<double>(perimeter_pixels(obj));
  return 4.0 * std::numbers::pi * static_cast<double>(obj.size()) / (p * p);
}

/// Full descriptor set for `obj`. `mask` supplies the image size (for the
/// normalized area and centroid) and the region, cropped to the object's
/// box, on which the Euler number is counted.
[[nodiscard]] inline BinaryFeatures shape_descriptors(const BinaryObject& obj, const BinaryMask& mask) {
  BinaryFeatures f;

  BinaryMask local(obj.width(), obj.height());
  for (const Point& p : obj.pixels) local.set(p.x - obj.box.x0, p.y - obj.box.y0, true);
  const int w = obj.width();
  const int h = obj.height();
  for (int gr = 0; gr < kProjectionGrid; ++gr) {
    const int y = static_cast<int>(((2 * gr + 1) * static_cast<std::int64_t>(h)) / (2 * kProjectionGrid));
    for (int gc = 0; gc < kProjectionGrid; ++gc) {
      const int x = static_cast<int>(((2 * gc + 1) * static_cast<std::int64_t>(w)) / (2 * kProjectionGrid));
      if (local(x, y)) {
        f.row_projections[gr] += 1.0;
        f.column_projections[gc] += 1.0;
      }
    }
  }
  for (int i = 0; i < kProjectionGrid; ++i) {
    f.row_projections[i] /= kProjectionGrid;
    f.column_projections[i] /= kProjectionGrid;
  }

  const double image_pixels = static_cast<double>(mask.width()) * mask.height();
  f.area_fraction = static_cast<double>(obj.size()) / image_pixels;
  f.aspect_ratio = aspect_ratio(obj);
  const Centroid c = centroid(obj);
  f.centroid_x = c.x / mask.width();
  f.centroid_y = c.y / mask.height();
  f.euler = euler_number(mask.crop(obj.box));
  f.thinness = thinness(obj);
  f.orientation = orientation(obj);
  return f;
}

}  // namespace wheatfx
