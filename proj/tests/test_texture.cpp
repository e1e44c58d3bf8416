#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace wheatfx;

namespace {

GlcmOptions options(int distance, int levels, std::vector<Offset> dirs = standard_directions()) {
  GlcmOptions o;
  o.distance = distance;
  o.levels = levels;
  o.directions = std::move(dirs);
  return o;
}

}  // namespace

TEST(Glcm, QuantizeBins) {
  EXPECT_EQ(quantize(0, 16), 0);
  EXPECT_EQ(quantize(15, 16), 0);
  EXPECT_EQ(quantize(16, 16), 1);
  EXPECT_EQ(quantize(255, 16), 15);
  EXPECT_EQ(quantize(127, 2), 0);
  EXPECT_EQ(quantize(128, 2), 1);
}

TEST(Glcm, ConstantImageIsSingleCell) {
  const GlcmMatrix g = compute_glcm(GrayImage(20, 20, 200), options(5, 16));
  const int q = quantize(200, 16);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) EXPECT_EQ(g.p(i, j), i == q && j == q ? 1.0 : 0.0);
  }
}

TEST(Glcm, MatchesAllPairsOracle) {
  Rng rng(100);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage img = wheatfx::testing::random_image(32, 32, rng);
    BinaryMask mask(32, 32);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) mask.set(x, y, rng.uniform() < 0.7);
    }
    for (int d : {1, 3, 5}) {
      for (int levels : {8, 16}) {
        for (bool symmetric : {true, false}) {
          GlcmOptions o = options(d, levels);
          o.symmetric = symmetric;
          Roi roi{Box{0, 0, 31, 31}, mask};
          EXPECT_EQ(compute_glcm(img, roi, o).counts(),
                    wheatfx::testing::glcm_oracle(img, mask, d, levels, o.directions, symmetric));
        }
      }
    }
  }
}

TEST(Glcm, SymmetricCountsAreSymmetric) {
  Rng rng(6);
  const GlcmMatrix g = compute_glcm(wheatfx::testing::random_image(40, 30, rng), options(2, 16));
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) EXPECT_EQ(g.p(i, j), g.p(j, i));
  }
  double sum = 0.0;
  for (double p : g.probabilities()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Glcm, TinyRoiHasNoValidPairs) {
  BinaryMask mask(20, 20);
  mask.set(10, 10, true);
  const Roi roi{Box{10, 10, 10, 10}, mask};
  try {
    (void)compute_glcm(GrayImage(20, 20, 9), roi, options(5, 16));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoValidPairs);
  }
}

TEST(Marginals, UniformAndSingleCell) {
  const GlcmMatrix uniform = GlcmMatrix::from_probabilities(4, std::vector<double>(16, 1.0 / 16));
  const GlcmMarginals m = marginals(uniform);
  EXPECT_DOUBLE_EQ(m.mu_i, 1.5);
  EXPECT_DOUBLE_EQ(m.mu_j, 1.5);
  EXPECT_DOUBLE_EQ(m.sigma_i, std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(m.sigma_j, std::sqrt(1.25));

  std::vector<double> p(16, 0.0);
  p[2 * 4 + 2] = 1.0;
  const GlcmMarginals s = marginals(GlcmMatrix::from_probabilities(4, p));
  EXPECT_EQ(s.mu_i, 2.0);
  EXPECT_EQ(s.sigma_i, 0.0);
  EXPECT_EQ(s.sigma_j, 0.0);
}

TEST(TexturalFeatures, SingleCell) {
  std::vector<double> p(64, 0.0);
  p[3 * 8 + 3] = 1.0;
  const TexturalFeatures f = textural_features(GlcmMatrix::from_probabilities(8, p));
  EXPECT_EQ(f.entropy, 0.0);
  EXPECT_EQ(f.inertia, 0.0);
  EXPECT_EQ(f.correlation, 1.0);
  EXPECT_EQ(f.inverse_difference, 1.0);
  EXPECT_EQ(f.energy, 1.0);
}

TEST(TexturalFeatures, UniformEntropyIsFourBits) {
  const auto f = textural_features(GlcmMatrix::from_probabilities(4, std::vector<double>(16, 1.0)));
  EXPECT_DOUBLE_EQ(f.entropy, 4.0);
}

TEST(TexturalFeatures, PixelCheckerboard) {
  GrayImage img(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) img(x, y) = (x + y) % 2 == 0 ? 0 : 255;
  }
  const GlcmMatrix g = compute_glcm(img, options(1, 2, {{1, 0}}));
  EXPECT_EQ(g.p(0, 0), 0.0);
  EXPECT_EQ(g.p(1, 1), 0.0);
  EXPECT_EQ(g.p(0, 1), 0.5);
  const TexturalFeatures f = textural_features(g);
  EXPECT_DOUBLE_EQ(f.inertia, 1.0);
  EXPECT_DOUBLE_EQ(f.correlation, -1.0);
  EXPECT_DOUBLE_EQ(f.energy, 0.5);
}

TEST(TexturalFeatures, RandomMatricesStayInRange) {
  Rng rng(50);
  for (int trial = 0; trial < 500; ++trial) {
    const int levels = 2 + static_cast<int>(rng.uniform_index(15));
    std::vector<double> p(static_cast<std::size_t>(levels) * levels);
    for (double& v : p) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    p[0] += 1e-3;
    const GlcmMatrix g = GlcmMatrix::from_probabilities(levels, p);
    const TexturalFeatures f = textural_features(g);
    EXPECT_GT(f.energy, 0.0);
    EXPECT_LE(f.energy, 1.0);
    EXPECT_GT(f.inverse_difference, 0.0);
    EXPECT_LE(f.inverse_difference, 1.0);
    EXPECT_GE(f.correlation, -1.0 - 1e-9);
    EXPECT_LE(f.correlation, 1.0 + 1e-9);
    EXPECT_LE(f.entropy, 2.0 * std::log2(levels) + 1e-12);
  }
}

TEST(TexturalFeatures, DiagonalOnlyIsExact) {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const int levels = 2 + static_cast<int>(rng.uniform_index(30));
    std::vector<double> p(static_cast<std::size_t>(levels) * levels, 0.0);
    for (int i = 0; i < levels; ++i) p[static_cast<std::size_t>(i) * levels + i] = rng.uniform();
    p[0] += 1e-3;
    const TexturalFeatures f = textural_features(GlcmMatrix::from_probabilities(levels, p));
    EXPECT_EQ(f.inertia, 0.0);
    EXPECT_EQ(f.inverse_difference, 1.0);
  }
}

TEST(TexturalFeatures, BinShiftLeavesFeaturesUnchanged) {
  // Values confined to [0, 160) shifted up by exactly one bin (16 at L = 16).
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    GrayImage a(48, 48), b(48, 48);
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 48; ++x) {
        a(x, y) = static_cast<std::uint8_t>(rng.uniform_index(160));
        b(x, y) = static_cast<std::uint8_t>(a(x, y) + 16);
      }
    }
    const GlcmMatrix ga = compute_glcm(a, options(3, 16));
    const GlcmMatrix gb = compute_glcm(b, options(3, 16));
    for (int i = 0; i + 1 < 16; ++i) {
      for (int j = 0; j + 1 < 16; ++j) ASSERT_EQ(ga.count(i, j), gb.count(i + 1, j + 1));
    }
    const TexturalFeatures fa = textural_features(ga);
    const TexturalFeatures fb = textural_features(gb);
    EXPECT_EQ(fa.inertia, fb.inertia);
    EXPECT_EQ(fa.entropy, fb.entropy);
    EXPECT_EQ(fa.energy, fb.energy);
    EXPECT_EQ(fa.inverse_difference, fb.inverse_difference);
    EXPECT_NEAR(fa.correlation, fb.correlation, 1e-12);
  }
}
