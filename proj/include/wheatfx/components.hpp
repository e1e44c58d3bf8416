#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wheatfx/error.hpp"

namespace wheatfx {

/// Inclusive pixel box.
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  [[nodiscard]] int width() const noexcept { return x1 - x0 + 1; }
  [[nodiscard]] int height() const noexcept { return y1 - y0 + 1; }
  [[nodiscard]] bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }

  friend bool operator==(const Box&, const Box&) = default;
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

class BinaryMask {
 public:
  BinaryMask() = default;

  BinaryMask(int width, int height)
      : width_(width), height_(height), foreground_(static_cast<std::size_t>(width) * height, 0) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::kInvalidDimensions, "mask must be at least 1x1");
  }

  /// `bits` is row-major; any nonzero entry is foreground.
  BinaryMask(int width, int height, std::span<const std::uint8_t> bits) : BinaryMask(width, height) {
    if (bits.size() != foreground_.size()) {
      throw Error(ErrorCode::kInvalidDimensions, "mask bit count does not match width*height");
    }
    for (std::size_t i = 0; i < bits.size(); ++i) {
      foreground_[i] = bits[i] != 0 ? 1 : 0;
      count_ += foreground_[i];
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t foreground_count() const noexcept { return count_; }
  [[nodiscard]] bool empty() const noexcept { return count_ == 0; }
  [[nodiscard]] std::span<const std::uint8_t> bits() const noexcept { return foreground_; }

  [[nodiscard]] bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  [[nodiscard]] bool operator()(int x, int y) const {
    return foreground_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }

  /// Out-of-bounds reads are background.
  [[nodiscard]] bool test(int x, int y) const noexcept { return in_bounds(x, y) && (*this)(x, y); }

  void set(int x, int y, bool on) {
    auto& cell = foreground_[static_cast<std::size_t>(y) * width_ + x];
    const std::uint8_t v = on ? 1 : 0;
    count_ = count_ - cell + v;
    cell = v;
  }

  [[nodiscard]] BinaryMask crop(const Box& box) const {
    BinaryMask out(box.width(), box.height());
    for (int y = box.y0; y <= box.y1; ++y) {
      for (int x = box.x0; x <= box.x1; ++x) {
        if ((*this)(x, y)) out.set(x - box.x0, y - box.y0, true);
      }
    }
    return out;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> foreground_;
  std::size_t count_ = 0;
};

/// One 8-connected foreground component. Pixels are in raster order.
struct BinaryObject {
  std::vector<Point> pixels;
  Box box;

  [[nodiscard]] std::size_t size() const noexcept { return pixels.size(); }
  [[nodiscard]] int width() const noexcept { return box.width(); }
  [[nodiscard]] int height() const noexcept { return box.height(); }
};

enum class Connectivity { kFour, kEight };

namespace detail {

/// Labels components of pixels whose mask value equals `value`. Label 0 means
/// "not part of the selected value"; components are numbered from 1 in the
/// raster order of their first pixel.
inline std::vector<int> label_components(const BinaryMask& mask, bool value, Connectivity conn, int& count) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
  std::vector<Point> stack;
  count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (mask(x, y) != value || labels[idx] != 0) continue;
      ++count;
      labels[idx] = count;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (conn == Connectivity::kFour && dx != 0 && dy != 0) continue;
            const int nx = p.x + dx;
            const int ny = p.y + dy;
            if (!mask.in_bounds(nx, ny) || mask(nx, ny) != value) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (labels[nidx] != 0) continue;
            labels[nidx] = count;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  return labels;
}

}  // namespace detail

/// 8-connected foreground components ordered by their first pixel in raster
/// order (top row first, then leftmost column).
[[nodiscard]] inline std::vector<BinaryObject> connected_components(const BinaryMask& mask) {
  if (mask.empty()) return {};
  int count = 0;
  const auto labels = detail::label_components(mask, true, Connectivity::kEight, count);
  std::vector<BinaryObject> objects(static_cast<std::size_t>(count));
  for (auto& obj : objects) obj.box = {mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int label = labels[static_cast<std::size_t>(y) * mask.width() + x];
      if (label == 0) continue;
      auto& obj = objects[label - 1];
      obj.pixels.push_back({x, y});
      obj.box.x0 = std::min(obj.box.x0, x);
      obj.box.y0 = std::min(obj.box.y0, y);
      obj.box.x1 = std::max(obj.box.x1, x);
      obj.box.y1 = std::max(obj.box.y1, y);
    }
  }
  return objects;
}

/// Euler number C - H: C counts 8-connected foreground components, H counts
/// 4-connected background components that do not touch the mask border.
[[nodiscard]] inline int euler_number(const BinaryMask& mask) {
  int components = 0;
  detail::label_components(mask, true, Connectivity::kEight, components);
  int background = 0;
  const auto labels = detail::label_components(mask, false, Connectivity::kFour, background);
  std::vector<std::uint8_t> touches(static_cast<std::size_t>(background) + 1, 0);
  const int w = mask.width();
  const int h = mask.height();
  for (int x = 0; x < w; ++x) {
    touches[labels[x]] = 1;
    touches[labels[static_cast<std::size_t>(h - 1) * w + x]] = 1;
  }
  for (int y = 0; y < h; ++y) {
    touches[labels[static_cast<std::size_t>(y) * w]] = 1;
    touches[labels[static_cast<std::size_t>(y) * w + w - 1]] = 1;
  }
  int holes = 0;
  for (int label = 1; label <= background; ++label) holes += touches[label] == 0 ? 1 : 0;
  return components - holes;
}

/// Mask of the same size holding only the object's pixels.
[[nodiscard]] inline BinaryMask object_mask(const BinaryObject& obj, int width, int height) {
  BinaryMask out(width, height);
  for (const Point& p : obj.pixels) out.set(p.x, p.y, true);
  return out;
}

}  // namespace wheatfx
