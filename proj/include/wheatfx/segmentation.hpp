#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "wheatfx/components.hpp"
#include "wheatfx/error.hpp"
#include "wheatfx/imaging.hpp"

namespace wheatfx {

/// Largest possible unnormalized L2 Sobel magnitude for 8-bit input: 4 * 255.
inline constexpr double kMaxSobelMagnitude = 1020.0;

struct CannyParams {
  double low = 100.0;
  double high = 100.0;
  double sigma = 1.4;
};

struct EdgeMap {
  BinaryMask pixels;

  [[nodiscard]] int width() const noexcept { return pixels.width(); }
  [[nodiscard]] int height() const noexcept { return pixels.height(); }
  [[nodiscard]] std::size_t count() const noexcept { return pixels.foreground_count(); }
  [[nodiscard]] bool operator()(int x, int y) const { return pixels(x, y); }
};

struct Roi {
  Box box;
  /// Full-image-sized mask holding only the selected component.
  BinaryMask mask;
};

namespace detail {

/// Reflect-101 border index (…, 2, 1 | 0, 1, 2, … n-1 | n-2, …).
[[nodiscard]] inline int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

class FloatPlane {
 public:
  FloatPlane(int w, int h) : w_(w), h_(h), v_(static_cast<std::size_t>(w) * h, 0.0) {}
  [[nodiscard]] double operator()(int x, int y) const { return v_[static_cast<std::size_t>(y) * w_ + x]; }
  double& operator()(int x, int y) { return v_[static_cast<std::size_t>(y) * w_ + x]; }
  [[nodiscard]] double reflected(int x, int y) const { return (*this)(reflect_index(x, w_), reflect_index(y, h_)); }
  [[nodiscard]] int width() const noexcept { return w_; }
  [[nodiscard]] int height() const noexcept { return h_; }

 private:
  int w_;
  int h_;
  std::vector<double> v_;
};

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

inline FloatPlane gaussian_blur(const GrayImage& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width();
  const int h = img.height();
  FloatPlane horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img(reflect_index(x + k, w), y);
      horizontal(x, y) = acc;
    }
  }
  FloatPlane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * horizontal(x, reflect_index(y + k, h));
      out(x, y) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Canny edge detector: Gaussian smoothing, 3x3 Sobel, non-maximum
/// suppression over four direction bins, double threshold and 8-connected
/// hysteresis. Thresholds are on the unnormalized L2 Sobel magnitude scale
/// [0, 1020]. Pixels with magnitude >= high seed edges; pixels with
/// magnitude >= low are kept when 8-connected to a seed.
[[nodiscard]] inline EdgeMap canny(const GrayImage& img, const CannyParams& params = {}) {
  if (!(params.low >= 0.0) || !(params.high <= kMaxSobelMagnitude) || params.low > params.high) {
    throw Error(ErrorCode::kInvalidThresholds,
                "need 0 <= low <= high <= 1020, got (" + std::to_string(params.low) + ", " +
                    std::to_string(params.high) + ")");
  }
  if (!(params.sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "canny sigma must be > 0");

  const int w = img.width();
  const int h = img.height();
  const auto smooth = detail::gaussian_blur(img, params.sigma);

  detail::FloatPlane magnitude(w, h);
  std::vector<std::uint8_t> direction(static_cast<std::size_t>(w) * h, 0);
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto s = [&](int dx, int dy) { return smooth.reflected(x + dx, y + dy); };
      const double gx = (s(1, -1) + 2.0 * s(1, 0) + s(1, 1)) - (s(-1, -1) + 2.0 * s(-1, 0) + s(-1, 1));
      const double gy = (s(-1, 1) + 2.0 * s(0, 1) + s(1, 1)) - (s(-1, -1) + 2.0 * s(0, -1) + s(1, -1));
      magnitude(x, y) = std::hypot(gx, gy);
      // 0: horizontal gradient, 1: 45 deg (down-right), 2: vertical, 3: 135 deg (down-left)
      const double ax = std::abs(gx);
      const double ay = std::abs(gy);
      std::uint8_t bin = 0;
      if (ay <= tan22 * ax) {
        bin = 0;
      } else if (ay >= tan67 * ax) {
        bin = 2;
      } else {
        bin = (gx > 0) == (gy > 0) ? 1 : 3;
      }
      direction[static_cast<std::size_t>(y) * w + x] = bin;
    }
  }

  auto mag_or_zero = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : magnitude(x, y); };
  constexpr int kStep[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};

  // 2 = strong, 1 = weak, 0 = suppressed
  std::vector<std::uint8_t> state(static_cast<std::size_t>(w) * h, 0);
  std::vector<Point> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = magnitude(x, y);
      if (m <= 0.0 || m < params.low) continue;
      const auto& step = kStep[direction[static_cast<std::size_t>(y) * w + x]];
      const double behind = mag_or_zero(x - step[0], y - step[1]);
      const double ahead = mag_or_zero(x + step[0], y + step[1]);
      if (!(m > behind && m >= ahead)) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (m >= params.high) {
        state[idx] = 2;
        stack.push_back({x, y});
      } else {
        state[idx] = 1;
      }
    }
  }

  BinaryMask edges(w, h);
  for (const Point& p : stack) edges.set(p.x, p.y, true);
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = p.x + dx;
        const int ny = p.y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
        if (state[idx] != 1) continue;
        state[idx] = 2;
        edges.set(nx, ny, true);
        stack.push_back({nx, ny});
      }
    }
  }
  return EdgeMap{std::move(edges)};
}

/// foreground(p) = img(p) >= t.
[[nodiscard]] inline BinaryMask threshold_segment(const GrayImage& img, int t) {
  if (t < 0 || t > 255) throw Error(ErrorCode::kInvalidThresholds, "segmentation threshold " + std::to_string(t));
  BinaryMask mask(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img(x, y) >= t) mask.set(x, y, true);
    }
  }
  return mask;
}

/// Region of interest around the largest 8-connected component; on equal
/// sizes the component that appears first in raster order wins.
[[nodiscard]] inline Roi extract_roi(const BinaryMask& mask) {
  const auto objects = connected_components(mask);
  if (objects.empty()) throw Error(ErrorCode::kEmptyMask, "no foreground pixel to build a region of interest");
  const BinaryObject* best = &objects.front();
  for (const auto& obj : objects) {
    if (obj.size() > best->size()) best = &obj;
  }
  return Roi{best->box, object_mask(*best, mask.width(), mask.height())};
}

/// Whole-image region, used when segmentation yields nothing.
[[nodiscard]] inline Roi whole_image_roi(int width, int height) {
  BinaryMask mask(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) mask.set(x, y, true);
  }
  return Roi{Box{0, 0, width - 1, height - 1}, std::move(mask)};
}

}  // namespace wheatfx
