#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>

#include "wheatfx/image_io.hpp"
#include "wheatfx/imaging.hpp"
#include "wheatfx/rng.hpp"

namespace wheatfx {

/// Four texture families used as a stand-in benchmark for the leaf classes.
enum class SyntheticClass { kCheckerboard, kHealthy, kSpeckled, kStripes };

inline constexpr std::array<SyntheticClass, 4> kSyntheticClasses = {
    SyntheticClass::kCheckerboard, SyntheticClass::kHealthy, SyntheticClass::kSpeckled, SyntheticClass::kStripes};

inline std::string_view to_string(SyntheticClass c) {
  switch (c) {
    case SyntheticClass::kCheckerboard: return "checkerboard";
    case SyntheticClass::kHealthy: return "healthy";
    case SyntheticClass::kSpeckled: return "speckled";
    case SyntheticClass::kStripes: return "stripes";
  }
  return "healthy";
}

struct SyntheticOptions {
  int size = kWorkingSize;
  double noise_sigma = 6.0;
};

/// healthy: near-constant bright field; stripes: horizontal bands;
/// checkerboard: square cells; speckled: bright blobs plus salt-and-pepper
/// impulses on a dark field. Periods, phases and intensities vary per image.
[[nodiscard]] inline GrayImage synthesize_image(SyntheticClass cls, Rng& rng, const SyntheticOptions& opt = {}) {
  const int n = opt.size;
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  auto at = [&](int x, int y) -> double& { return v[static_cast<std::size_t>(y) * n + x]; };
  const double lo = rng.uniform(20.0, 60.0);
  const double hi = rng.uniform(160.0, 220.0);
  switch (cls) {
    case SyntheticClass::kHealthy: {
      const double base = rng.uniform(120.0, 200.0);
      std::fill(v.begin(), v.end(), base);
      break;
    }
    case SyntheticClass::kStripes: {
      const int period = 12 + static_cast<int>(rng.uniform_index(17));
      const int phase = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(period)));
      for (int y = 0; y < n; ++y) {
        const bool on = ((y + phase) % period) < period / 2;
        for (int x = 0; x < n; ++x) at(x, y) = on ? hi : lo;
      }
      break;
    }
    case SyntheticClass::kCheckerboard: {
      const int cell = 12 + static_cast<int>(rng.uniform_index(17));
      const int ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cell)));
      const int oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cell)));
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) at(x, y) = (((x + ox) / cell + (y + oy) / cell) % 2 == 0) ? hi : lo;
      }
      break;
    }
    case SyntheticClass::kSpeckled: {
      std::fill(v.begin(), v.end(), lo);
      const int blobs = 15 + static_cast<int>(rng.uniform_index(26));
      for (int b = 0; b < blobs; ++b) {
        const double cx = rng.uniform(0.0, n);
        const double cy = rng.uniform(0.0, n);
        const double r = rng.uniform(3.0, 9.0);
        const int x0 = std::max(0, static_cast<int>(cx - r));
        const int x1 = std::min(n - 1, static_cast<int>(cx + r));
        const int y0 = std::max(0, static_cast<int>(cy - r));
        const int y1 = std::min(n - 1, static_cast<int>(cy + r));
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) at(x, y) = hi;
          }
        }
      }
      for (double& px : v) {
        const double u = rng.uniform();
        if (u < 0.01) px = 255.0;
        else if (u < 0.02) px = 0.0;
      }
      break;
    }
  }
  GrayImage img(n, n);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double noisy = v[i] + opt.noise_sigma * rng.normal();
    img.samples()[i] = static_cast<std::uint8_t>(std::clamp(std::floor(noisy + 0.5), 0.0, 255.0));
  }
  return img;
}

/// Writes `per_class` PNGs per class into root/<class>/img_NNNN.png. Image i
/// of class c is generated from Rng(seed).split(c * 1000003 + i).
inline void write_synthetic_dataset(const std::filesystem::path& root, int per_class, std::uint64_t seed,
                                    const SyntheticOptions& opt = {}) {
  const Rng master(seed);
  for (std::size_t c = 0; c < kSyntheticClasses.size(); ++c) {
    const auto dir = root / std::string(to_string(kSyntheticClasses[c]));
    std::filesystem::create_directories(dir);
    for (int i = 0; i < per_class; ++i) {
      Rng rng = master.split(c * 1000003u + static_cast<std::uint64_t>(i));
      char name[32];
      std::snprintf(name, sizeof name, "img_%04d.png", i);
      save_png(dir / name, synthesize_image(kSyntheticClasses[c], rng, opt));
    }
  }
}

}  // namespace wheatfx
