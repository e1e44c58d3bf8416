#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/rng.hpp"
#include "wheatfx/tree.hpp"

namespace wheatfx {

struct ForestParams {
  int n_trees = 100;
  /// Features considered per split; 0 means ceil(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  TreeParams tree;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(ForestParams params, std::uint64_t seed, std::vector<DecisionTree> trees)
      : params_(params), seed_(seed), trees_(std::move(trees)) {}

  [[nodiscard]] const ForestParams& params() const noexcept { return params_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  [[nodiscard]] int num_classes() const { return trees_.front().num_classes(); }
  [[nodiscard]] int num_features() const { return trees_.front().num_features(); }

  /// Mean of the member trees' leaf probabilities.
  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const {
    std::vector<double> out(static_cast<std::size_t>(num_classes()), 0.0);
    for (const auto& tree : trees_) {
      const auto& p = tree.leaf_for(x).probabilities;
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += p[c];
    }
    for (double& v : out) v /= static_cast<double>(trees_.size());
    return out;
  }

  friend bool operator==(const RandomForest&, const RandomForest&) = default;

 private:
  ForestParams params_;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

[[nodiscard]] inline int resolve_max_features(const ForestParams& params, std::size_t num_features) {
  if (params.max_features > 0) return params.max_features;
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_features))));
}

/// Tree t draws its bootstrap sample and per-node feature subsets from
/// Rng(seed).split(t), so trees are independent of fitting order.
[[nodiscard]] inline RandomForest fit_forest(const FeatureMatrix& x, std::span<const int> y, int num_classes,
                                             const ForestParams& params, std::uint64_t seed) {
  detail::check_training_set(x, y, num_classes);
  if (params.n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  const int max_features = resolve_max_features(params, x.cols());
  const Rng root(seed);
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  const std::size_t n = x.rows();
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng = root.split(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = params.bootstrap ? rng.uniform_index(n) : i;
    trees.push_back(fit_tree(x, y, num_classes, params.tree, std::move(rows), max_features, &rng));
  }
  return RandomForest(params, seed, std::move(trees));
}

}  // namespace wheatfx
