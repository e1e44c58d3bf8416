#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wheatfx/error.hpp"

namespace wheatfx {

/// Pipeline working resolution (square).
inline constexpr int kWorkingSize = 224;

enum class ChannelOrder { kRgb, kBgr, kGray };

/// Decoded raster: row-major, interleaved 8-bit samples.
class RasterImage {
 public:
  RasterImage() = default;

  RasterImage(int width, int height, ChannelOrder order, std::vector<std::uint8_t> samples)
      : width_(width), height_(height), order_(order), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::kInvalidDimensions, "raster must be at least 1x1");
    }
    if (samples_.size() != static_cast<std::size_t>(width) * height * channels()) {
      throw Error(ErrorCode::kInvalidDimensions, "sample count does not match width*height*channels");
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int channels() const noexcept { return order_ == ChannelOrder::kGray ? 1 : 3; }
  [[nodiscard]] ChannelOrder channel_order() const noexcept { return order_; }
  [[nodiscard]] std::span<const std::uint8_t> samples() const noexcept { return samples_; }

  [[nodiscard]] std::uint8_t at(int x, int y, int c) const {
    return samples_[(static_cast<std::size_t>(y) * width_ + x) * channels() + c];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  ChannelOrder order_ = ChannelOrder::kGray;
  std::vector<std::uint8_t> samples_;
};

/// Single-channel 8-bit image, row-major.
class GrayImage {
 public:
  GrayImage() = default;

  GrayImage(int width, int height, std::uint8_t fill = 0)
      : GrayImage(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                static_cast<std::size_t>(std::max(height, 0)),
                                            fill)) {}

  GrayImage(int width, int height, std::vector<std::uint8_t> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::kInvalidDimensions, "image must be at least 1x1");
    }
    if (samples_.size() != static_cast<std::size_t>(width) * height) {
      throw Error(ErrorCode::kInvalidDimensions, "sample count does not match width*height");
    }
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  [[nodiscard]] std::span<std::uint8_t> samples() noexcept { return samples_; }

  [[nodiscard]] std::uint8_t operator()(int x, int y) const {
    return samples_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& operator()(int x, int y) { return samples_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// BT.601 luma with round-half-up, evaluated in exact integer arithmetic.
[[nodiscard]] constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

[[nodiscard]] inline GrayImage to_grayscale(const RasterImage& img) {
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  std::vector<std::uint8_t> out(n);
  const auto src = img.samples();
  switch (img.channel_order()) {
    case ChannelOrder::kGray:
      std::copy(src.begin(), src.end(), out.begin());
      break;
    case ChannelOrder::kRgb:
      for (std::size_t i = 0; i < n; ++i) out[i] = luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
      break;
    case ChannelOrder::kBgr:
      for (std::size_t i = 0; i < n; ++i) out[i] = luma(src[3 * i + 2], src[3 * i + 1], src[3 * i]);
      break;
  }
  return GrayImage(img.width(), img.height(), std::move(out));
}

/// Bilinear resize with half-pixel-center mapping:
///   src = (dst + 0.5) * in / out - 0.5, clamped to [0, in - 1].
/// Results are rounded half-up and clamped to [0, 255].
[[nodiscard]] inline GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) {
    throw Error(ErrorCode::kInvalidDimensions,
                "resize target " + std::to_string(out_w) + "x" + std::to_string(out_h));
  }
  if (out_w == img.width() && out_h == img.height()) return img;

  struct Tap {
    int lo;
    int hi;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
      const double s = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const int lo = static_cast<int>(std::floor(s));
      t[d] = {lo, std::min(lo + 1, in - 1), s - lo};
    }
    return t;
  };
  const auto tx = taps(img.width(), out_w);
  const auto ty = taps(img.height(), out_h);

  GrayImage out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const Tap& v = ty[y];
    for (int x = 0; x < out_w; ++x) {
      const Tap& h = tx[x];
      const double top = img(h.lo, v.lo) * (1.0 - h.frac) + img(h.hi, v.lo) * h.frac;
      const double bottom = img(h.lo, v.hi) * (1.0 - h.frac) + img(h.hi, v.hi) * h.frac;
      const double value = top * (1.0 - v.frac) + bottom * v.frac;
      out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace wheatfx
