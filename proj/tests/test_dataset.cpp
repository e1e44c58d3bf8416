#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "test_support.hpp"

using namespace wheatfx;
using wheatfx::testing::TempDir;

namespace {

std::vector<int> balanced_labels(int classes, int per_class) {
  std::vector<int> y;
  for (int c = 0; c < classes; ++c) y.insert(y.end(), static_cast<std::size_t>(per_class), c);
  return y;
}

void expect_partition(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& p : parts) {
    for (auto i : p) ++seen.at(i);
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << i;
}

Dataset tiny_dataset(const std::vector<std::vector<double>>& columns0, const std::vector<int>& labels) {
  Dataset ds;
  ds.class_names = {"a", "b"};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    LabeledSample s;
    s.label = labels[i];
    for (std::size_t d = 0; d < columns0.size(); ++d) s.features[d] = columns0[d][i];
    ds.samples.push_back(s);
  }
  return ds;
}

void write_class_images(const std::filesystem::path& root, const std::string& cls, int n, std::uint64_t seed) {
  std::filesystem::create_directories(root / cls);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    save_png(root / cls / ("img" + std::to_string(i) + ".png"), wheatfx::testing::random_image(48, 40, rng));
  }
}

}  // namespace

TEST(Fuse, LayoutAndZeros) {
  EXPECT_EQ(fuse({}, {}).values, (std::array<double, kFeatureCount>{}));
  BinaryFeatures b;
  for (int i = 0; i < 8; ++i) {
    b.row_projections[i] = i;
    b.column_projections[i] = 8 + i;
  }
  b.area_fraction = 16;
  b.aspect_ratio = 17;
  b.centroid_x = 18;
  b.centroid_y = 19;
  b.euler = 20;
  b.thinness = 21;
  b.orientation = 22;
  const TexturalFeatures t{23, 24, 25, 26, 27};
  const FeatureVector v = fuse(b, t);
  for (std::size_t i = 0; i < kFeatureCount; ++i) EXPECT_EQ(v[i], static_cast<double>(i));
  EXPECT_EQ(feature_column_names().front(), "b00");
  EXPECT_EQ(feature_column_names()[22], "b22");
  EXPECT_EQ(feature_column_names()[23], "t0");
  EXPECT_EQ(feature_column_names().back(), "t4");
}

TEST(Fuse, NanThinnessNamesDimension21) {
  BinaryFeatures b;
  b.thinness = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)fuse(b, {});
    FAIL();
  } catch (const NonFiniteFeature& e) {
    EXPECT_EQ(e.dimension(), 21U);
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteFeature);
  }
}

TEST(Fuse, DistinctInputsGiveDistinctVectors) {
  Rng rng(3);
  std::set<std::array<double, kFeatureCount>> seen;
  for (int i = 0; i < 200; ++i) {
    BinaryFeatures b;
    TexturalFeatures t;
    b.row_projections[rng.uniform_index(8)] = rng.uniform();
    t.entropy = rng.uniform();
    seen.insert(fuse(b, t).values);
  }
  EXPECT_EQ(seen.size(), 200U);
}

TEST(Extraction, EmptyMaskFallsBackToWholeImage) {
  const Extraction e = extract(GrayImage(64, 64, 10));
  EXPECT_TRUE(e.roi_fallback);
  EXPECT_EQ(e.working.width(), kWorkingSize);
  EXPECT_EQ(e.features[16], 1.0);
}

TEST(Extraction, SmallRoiFallsBackForTexture) {
  GrayImage img(224, 224, 0);
  img(100, 100) = 255;
  const Extraction e = extract(img);
  EXPECT_FALSE(e.roi_fallback);
  EXPECT_TRUE(e.glcm_fallback);
}

TEST(Ingest, FourClassesOfTen) {
  TempDir dir("ingest");
  for (int c = 0; c < 4; ++c) write_class_images(dir.path(), "class" + std::to_string(c), 10, 100 + c);
  IngestOptions opt;
  opt.extraction.working_size = 64;
  const IngestResult r = ingest_directory(dir.path(), opt);
  EXPECT_EQ(r.dataset.size(), 40U);
  EXPECT_EQ(r.dataset.num_classes(), 4);
  EXPECT_TRUE(r.skipped.empty());
  EXPECT_EQ(r.dataset.class_names[2], "class2");

  opt.workers = 3;
  const IngestResult parallel = ingest_directory(dir.path(), opt);
  EXPECT_EQ(parallel.dataset.samples, r.dataset.samples);
}

TEST(Ingest, CorruptFileIsSkipped) {
  TempDir dir("corrupt");
  write_class_images(dir.path(), "a", 10, 1);
  write_class_images(dir.path(), "b", 9, 2);
  std::ofstream(dir.path() / "b" / "broken.png") << "\x89PNG\r\n\x1a\n garbage";
  IngestOptions opt;
  opt.extraction.working_size = 64;
  const IngestResult r = ingest_directory(dir.path(), opt);
  EXPECT_EQ(r.dataset.size(), 19U);
  ASSERT_EQ(r.skipped.size(), 1U);
  EXPECT_NE(r.skipped[0].path.find("broken.png"), std::string::npos);
}

TEST(Ingest, SingleClassIsRejected) {
  TempDir dir("single");
  write_class_images(dir.path(), "only", 3, 1);
  try {
    (void)ingest_directory(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewClasses);
  }
}

TEST(Split, TwentyFivePerClass) {
  const auto y = balanced_labels(4, 25);
  const SplitPlan plan = stratified_split(y, 0.2, 42);
  EXPECT_EQ(plan.train.size(), 80U);
  EXPECT_EQ(plan.test.size(), 20U);
  std::vector<int> per_class(4, 0);
  for (auto i : plan.test) ++per_class[y[i]];
  for (int c : per_class) EXPECT_EQ(c, 5);
  expect_partition({plan.train, plan.test}, y.size());

  const SplitPlan again = stratified_split(y, 0.2, 42);
  EXPECT_EQ(again.train, plan.train);
  EXPECT_EQ(again.test, plan.test);
  EXPECT_NE(stratified_split(y, 0.2, 43).test, plan.test);
}

TEST(Split, ClassOfOneIsTooSmall) {
  const std::vector<int> y = {0, 0, 0, 1};
  try {
    (void)stratified_split(y, 0.2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kClassTooSmall);
  }
}

TEST(Split, StratifiedWithinOne) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y;
    std::vector<int> sizes;
    for (int c = 0; c < 4; ++c) {
      sizes.push_back(2 + static_cast<int>(rng.uniform_index(40)));
      y.insert(y.end(), static_cast<std::size_t>(sizes.back()), c);
    }
    const double f = rng.uniform(0.05, 0.95);
    const SplitPlan plan = stratified_split(y, f, rng.next_u64());
    expect_partition({plan.train, plan.test}, y.size());
    std::vector<int> tests(4, 0);
    for (auto i : plan.test) ++tests[y[i]];
    for (int c = 0; c < 4; ++c) EXPECT_LE(std::abs(tests[c] - sizes[c] * f), 1.0);
  }
}

TEST(KFold, FiveFoldsOfTwenty) {
  const auto y = balanced_labels(4, 25);
  const FoldPlan plan = stratified_kfold(y, 5, 7);
  ASSERT_EQ(plan.k(), 5U);
  for (const auto& f : plan.folds) EXPECT_EQ(f.size(), 20U);
  expect_partition(plan.folds, y.size());
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(plan.training_indices(f).size(), 80U);
}

TEST(KFold, TwentyThreePerClassGivesFourOrFive) {
  const auto y = balanced_labels(3, 23);
  const FoldPlan plan = stratified_kfold(y, 5, 1);
  expect_partition(plan.folds, y.size());
  for (const auto& f : plan.folds) {
    std::vector<int> per_class(3, 0);
    for (auto i : f) ++per_class[y[i]];
    for (int c : per_class) EXPECT_TRUE(c == 4 || c == 5) << c;
  }
}

TEST(KFold, ClassSmallerThanK) {
  const std::vector<int> y = {0, 0, 0, 0, 0, 1, 1, 1};
  EXPECT_THROW((void)stratified_kfold(y, 5, 1), Error);
}

TEST(Standardize, UsesTrainStatisticsOnly) {
  // Dim 0: train {3, 7} (mean 5, std 2), test 9 and 1000. Dim 1 is constant on train.
  const Dataset ds = tiny_dataset({{3, 7, 9, 1000}, {4, 4, 8, -2}}, {0, 1, 0, 1});
  SplitPlan plan;
  plan.train = {0, 1};
  plan.test = {2, 3};
  const Dataset z = standardize(ds, plan);
  ASSERT_TRUE(z.standardization.has_value());
  EXPECT_EQ(z.standardization->means[0], 5.0);
  EXPECT_EQ(z.standardization->stds[0], 2.0);
  EXPECT_EQ(z.samples[2].features[0], 2.0);
  EXPECT_EQ(z.samples[0].features[0], -1.0);
  EXPECT_EQ(z.samples[3].features[1], -2.0);
  EXPECT_EQ(z.samples[2].features[1], 8.0);

  Dataset altered = ds;
  altered.samples[3].features[0] = -55.0;
  EXPECT_EQ(standardize(altered, plan).standardization, z.standardization);
}

TEST(FeatureCsv, RoundTripIsBitIdentical) {
  Dataset ds;
  ds.class_names = {"crown and root rot", "healthy", "leaf, rust"};
  Rng rng(14);
  for (int i = 0; i < 30; ++i) {
    LabeledSample s;
    s.label = i % 3;
    s.source = "dir/img \"" + std::to_string(i) + "\".png";
    for (auto& v : s.features.values) v = rng.normal() * std::pow(10.0, static_cast<double>(rng.uniform_index(30)) - 15);
    s.features[20] = -1;
    ds.samples.push_back(s);
  }
  std::ostringstream first;
  write_feature_csv(first, ds);
  std::istringstream in(first.str());
  const Dataset back = read_feature_csv(in);
  EXPECT_EQ(back.class_names, ds.class_names);
  EXPECT_EQ(back.samples, ds.samples);
  std::ostringstream second;
  write_feature_csv(second, back);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str().substr(0, first.str().find('\n')), feature_csv_header());
}

TEST(FeatureCsv, BadHeaderIsRejected) {
  std::istringstream in("path,label,x\n");
  EXPECT_THROW((void)read_feature_csv(in), Error);
}
