#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace wheatfx;

namespace {

struct Problem {
  FeatureMatrix x;
  std::vector<int> y;
  int k = 0;
};

/// Gaussian blobs: class c is centered at c * separation along every dimension.
Problem blobs(std::size_t n, std::size_t d, int k, double separation, Rng& rng) {
  Problem p{FeatureMatrix(n, d), std::vector<int>(n), k};
  for (std::size_t i = 0; i < n; ++i) {
    p.y[i] = static_cast<int>(i % static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < d; ++j) p.x(i, j) = p.y[i] * separation + rng.normal();
  }
  return p;
}

Problem small_integer_problem(Rng& rng) {
  const std::size_t n = 2 + rng.uniform_index(59);
  const std::size_t d = 1 + rng.uniform_index(5);
  const int k = 2 + static_cast<int>(rng.uniform_index(3));
  Problem p{FeatureMatrix(n, d), std::vector<int>(n), k};
  for (std::size_t i = 0; i < n; ++i) {
    p.y[i] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    for (std::size_t j = 0; j < d; ++j) p.x(i, j) = static_cast<double>(rng.uniform_index(8));
  }
  return p;
}

DecisionTree constant_tree(std::vector<double> probabilities, int num_features = 1) {
  TreeNode leaf;
  leaf.probabilities = std::move(probabilities);
  leaf.class_counts.assign(leaf.probabilities.size(), 0);
  const int k = static_cast<int>(leaf.probabilities.size());
  return DecisionTree(k, num_features, {}, {leaf});
}

double accuracy(const Model& m, const FeatureMatrix& x, std::span<const int> y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) hits += predict_class(m, x.row(i)) == y[i];
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

void expect_probabilities(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

}  // namespace

TEST(Tree, OneDimensionalSplitAtMidpoint) {
  const FeatureMatrix x(4, 1, {0, 1, 10, 11});
  const std::vector<int> y = {0, 0, 1, 1};
  const DecisionTree t = fit_tree(x, y, 2);
  EXPECT_EQ(t.root().feature, 0);
  EXPECT_EQ(t.root().threshold, 5.5);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(argmax(t.predict_proba(x.row(i))), y[i]);
}

TEST(Tree, SingleClassIsOneLeaf) {
  const FeatureMatrix x(3, 2, {1, 2, 3, 4, 5, 6});
  const std::vector<int> y = {1, 1, 1};
  const DecisionTree t = fit_tree(x, y, 3);
  ASSERT_EQ(t.nodes().size(), 1U);
  EXPECT_EQ(t.root().probabilities, (std::vector<double>{0, 1, 0}));
}

TEST(Tree, RootSplitMatchesExhaustiveSearch) {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const Problem p = small_integer_problem(rng);
    const DecisionTree t = fit_tree(p.x, p.y, p.k);
    const auto want = wheatfx::testing::best_root_split(p.x, p.y, p.k);
    if (!want.found) {
      EXPECT_TRUE(t.root().is_leaf()) << trial;
      continue;
    }
    ASSERT_FALSE(t.root().is_leaf()) << trial;
    EXPECT_EQ(t.root().feature, want.feature) << trial;
    EXPECT_EQ(t.root().threshold, want.threshold) << trial;
  }
}

TEST(Tree, ContinuousRootSplitMatchesExhaustiveSearch) {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Problem p = blobs(50, 4, 3, 0.7, rng);
    const DecisionTree t = fit_tree(p.x, p.y, p.k);
    const auto want = wheatfx::testing::best_root_split(p.x, p.y, p.k);
    ASSERT_TRUE(want.found);
    EXPECT_EQ(t.root().feature, want.feature);
    EXPECT_EQ(t.root().threshold, want.threshold);
  }
}

TEST(Tree, StructuralInvariants) {
  Rng rng(5);
  const Problem p = blobs(200, 5, 4, 0.5, rng);
  for (int depth : {1, 3, 12}) {
    TreeParams params;
    params.max_depth = depth;
    const DecisionTree t = fit_tree(p.x, p.y, p.k, params);
    EXPECT_LE(t.depth(), depth);
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) {
        expect_probabilities(n.probabilities);
      } else {
        EXPECT_GE(n.left, 0);
        EXPECT_GE(n.right, 0);
      }
    }
  }
}

TEST(Tree, Errors) {
  const FeatureMatrix x(2, 2, {0, 1, 2, 3});
  const std::vector<int> y = {0, 1};
  const DecisionTree t = fit_tree(x, y, 2);
  const std::vector<double> wrong(3, 0.0);
  try {
    (void)t.predict_proba(wrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  try {
    (void)fit_tree(FeatureMatrix(0, 2), {}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyTrainingSet);
  }
}

TEST(Forest, SingleFullTreeWithoutBootstrapIsATree) {
  Rng rng(6);
  const Problem p = blobs(120, 4, 3, 0.8, rng);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.max_features = 4;
  const RandomForest f = fit_forest(p.x, p.y, p.k, params, 17);
  const DecisionTree t = fit_tree(p.x, p.y, p.k);
  EXPECT_EQ(f.trees().front().nodes(), t.nodes());
}

TEST(Forest, IdenticalTreesAverageToOne) {
  const DecisionTree t = constant_tree({0.25, 0.75});
  const RandomForest f({}, 0, {t, t, t});
  const std::vector<double> x = {0.0};
  EXPECT_EQ(f.predict_proba(x), t.predict_proba(x));
}

TEST(Forest, DeterministicGivenSeed) {
  Rng rng(7);
  const Problem p = blobs(100, 5, 3, 0.6, rng);
  ForestParams params;
  params.n_trees = 15;
  const RandomForest a = fit_forest(p.x, p.y, p.k, params, 5);
  const RandomForest b = fit_forest(p.x, p.y, p.k, params, 5);
  EXPECT_EQ(dump_model({{}, {"a", "b", "c"}, {}, a}), dump_model({{}, {"a", "b", "c"}, {}, b}));
  EXPECT_FALSE(a == fit_forest(p.x, p.y, p.k, params, 6));
  EXPECT_EQ(resolve_max_features(params, 28), 6);
}

TEST(Forest, AtLeastAsAccurateAsOneTreeOnNoisyData) {
  Rng rng(8);
  const Problem train = blobs(300, 6, 2, 0.6, rng);
  const Problem test = blobs(300, 6, 2, 0.6, rng);
  const Model tree = fit_tree(train.x, train.y, 2);
  const Model forest = fit_forest(train.x, train.y, 2, {}, 3);
  EXPECT_GE(accuracy(forest, test.x, test.y), accuracy(tree, test.x, test.y));
}

TEST(Gbm, ZeroLearningRateGivesPriors) {
  const FeatureMatrix x(4, 1, {0, 1, 2, 3});
  const std::vector<int> y = {0, 1, 1, 1};
  GbmParams params;
  params.n_rounds = 1;
  params.learning_rate = 0.0;
  const GradientBoosting g = fit_gbm(x, y, 2, params);
  const auto p = g.predict_proba(x.row(0));
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(Gbm, TrainingLossDecreasesOnTextureFixture) {
  const Dataset ds = wheatfx::testing::synthetic_dataset(12, 5, 64);
  const auto m = to_matrix(ds);
  GbmParams params;
  params.n_rounds = 50;
  const GradientBoosting g = fit_gbm(m.x, m.y, 4, params);
  const auto& loss = g.train_loss();
  ASSERT_EQ(loss.size(), 51U);
  EXPECT_LT(loss.back(), loss[1]);
  for (std::size_t r = 1; r < loss.size(); ++r) EXPECT_LE(loss[r], loss[r - 1] + 1e-6) << r;
}

TEST(Voting, HardMajorityAndTies) {
  const BaseModel a = constant_tree({0.9, 0.1});
  const BaseModel b = constant_tree({0.2, 0.8});
  const std::vector<double> x = {0.0};
  EXPECT_EQ(fit_voting({a, a, b}).predict_proba(x), (std::vector<double>{1, 0}));
  EXPECT_EQ(fit_voting({b, a}).predict_proba(x), (std::vector<double>{1, 0}));
  EXPECT_EQ(fit_voting({b, b, a}).predict_proba(x), (std::vector<double>{0, 1}));
}

TEST(Voting, SoftAverages) {
  const VotingEnsemble v = fit_voting({constant_tree({0.6, 0.4}), constant_tree({0.2, 0.8})}, VotingMode::kSoft);
  const std::vector<double> x = {0.0};
  const auto p = v.predict_proba(x);
  EXPECT_DOUBLE_EQ(p[0], 0.4);
  EXPECT_DOUBLE_EQ(p[1], 0.6);
  EXPECT_EQ(argmax(p), 1);
}

TEST(Voting, HardVotePermutationInvariantWithoutTies) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BaseModel> bases;
    for (int b = 0; b < 5; ++b) {
      std::vector<double> p(3, 0.0);
      p[rng.uniform_index(3)] = 1.0;
      bases.push_back(constant_tree(p));
    }
    const std::vector<double> x = {0.0};
    const auto first = fit_voting(bases).predict_proba(x);
    std::vector<double> votes(3, 0.0);
    for (const auto& b : bases) votes[static_cast<std::size_t>(argmax(predict_proba(b, x)))] += 1;
    std::vector<double> sorted = votes;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] == sorted[1]) continue;
    rng.shuffle(std::span<BaseModel>(bases));
    EXPECT_EQ(fit_voting(bases).predict_proba(x), first);
  }
}

TEST(Voting, Validation) {
  EXPECT_THROW((void)fit_voting({constant_tree({1, 0})}), Error);
  try {
    (void)fit_voting({constant_tree({1, 0}), constant_tree({1, 0, 0})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kClassSetMismatch);
  }
}

TEST(Stacking, MetaFeaturesAreOutOfFold) {
  Rng rng(11);
  const Problem p = blobs(60, 3, 3, 1.0, rng);
  BaseParams params;
  params.forest.n_trees = 5;
  params.gbm.n_rounds = 5;
  const std::vector<BaseKind> kinds = {BaseKind::kTree, BaseKind::kForest, BaseKind::kGbm};
  StackingTrace trace;
  const std::uint64_t seed = 77;
  const StackingEnsemble s = fit_stacking(p.x, p.y, 3, kinds, params, 4, seed, {}, &trace);
  ASSERT_EQ(trace.folds.k(), 4U);
  ASSERT_EQ(trace.meta_features.cols(), 9U);
  const Rng root(seed);
  std::vector<int> owner(p.y.size(), -1);
  for (std::size_t f = 0; f < trace.folds.k(); ++f) {
    for (auto i : trace.folds.folds[f]) owner[i] = static_cast<int>(f);
  }
  for (std::size_t f = 0; f < trace.folds.k(); ++f) {
    const auto rows = trace.folds.training_indices(f);
    for (auto r : rows) ASSERT_NE(owner[r], static_cast<int>(f));
    const FeatureMatrix fx = p.x.select_rows(rows);
    const auto fy = select<int>(p.y, rows);
    std::vector<BaseModel> bases;
    for (std::size_t b = 0; b < kinds.size(); ++b) {
      bases.push_back(fit_base(kinds[b], params, fx, fy, 3, root.split(f + 1).split(b).seed()));
    }
    for (auto i : trace.folds.folds[f]) {
      const auto expected = meta_features(bases, p.x.row(i));
      const auto got = trace.meta_features.row(i);
      EXPECT_TRUE(std::equal(expected.begin(), expected.end(), got.begin())) << i;
    }
  }
  EXPECT_EQ(s.bases().size(), 3U);
}

TEST(Stacking, SeparableMetaProblemIsPerfect) {
  Rng rng(12);
  const Problem p = blobs(80, 2, 4, 25.0, rng);
  StackingTrace trace;
  const StackingEnsemble s = fit_stacking(p.x, p.y, 4, {BaseKind::kTree}, {}, 5, 3, {}, &trace);
  for (std::size_t i = 0; i < p.x.rows(); ++i) {
    ASSERT_EQ(argmax(trace.meta_features.row(i)), p.y[i]);
    EXPECT_EQ(argmax(s.predict_proba(p.x.row(i))), p.y[i]);
  }
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  const Problem p = blobs(40, 6, 4, 0.5, rng);
  const std::size_t width = 4 * 7;
  for (int point = 0; point < 10; ++point) {
    std::vector<double> w(width);
    for (double& v : w) v = rng.normal();
    std::vector<double> grad;
    (void)logistic_loss(w, p.x, p.y, 4, 1e-2, &grad);
    double diff = 0.0, norm_a = 0.0, norm_n = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double h = 1e-5;
      std::vector<double> plus = w, minus = w;
      plus[j] += h;
      minus[j] -= h;
      const double numeric = (logistic_loss(plus, p.x, p.y, 4, 1e-2) - logistic_loss(minus, p.x, p.y, 4, 1e-2)) / (2 * h);
      diff += (numeric - grad[j]) * (numeric - grad[j]);
      norm_a += grad[j] * grad[j];
      norm_n += numeric * numeric;
    }
    EXPECT_LE(std::sqrt(diff) / std::max(std::sqrt(norm_a), std::sqrt(norm_n)), 1e-6);
  }
}

TEST(Logistic, LossStrictlyDecreasesEarly) {
  Rng rng(14);
  const Problem p = blobs(100, 5, 3, 0.7, rng);
  std::vector<double> history;
  LogisticParams params;
  params.iterations = 100;
  (void)fit_logistic(p.x, p.y, 3, params, &history);
  ASSERT_EQ(history.size(), 101U);
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LT(history[i], history[i - 1]) << i;
}

TEST(Models, ProbabilitiesSumToOneAndSurviveSerialization) {
  Rng rng(15);
  const Problem p = blobs(90, 4, 3, 0.9, rng);
  ModelSpec spec;
  spec.base.forest.n_trees = 10;
  spec.base.gbm.n_rounds = 10;
  spec.meta.iterations = 200;
  for (ModelKind kind : {ModelKind::kTree, ModelKind::kForest, ModelKind::kGbm, ModelKind::kVoting,
                         ModelKind::kStacking}) {
    spec.kind = kind;
    for (VotingMode mode : {VotingMode::kHard, VotingMode::kSoft}) {
      spec.voting_mode = mode;
      const Model m = fit_model(spec, p.x, p.y, 3, 21);
      const Model back = model_from_json(kind, json::parse(model_to_json(m).dump()));
      for (std::size_t i = 0; i < p.x.rows(); ++i) {
        const auto a = predict_proba(m, p.x.row(i));
        expect_probabilities(a);
        ASSERT_EQ(predict_proba(back, p.x.row(i)), a) << to_string(kind);
      }
    }
  }
}
