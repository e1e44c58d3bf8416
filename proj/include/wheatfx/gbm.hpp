#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/tree.hpp"

namespace wheatfx {

/// Numerically stable softmax.
[[nodiscard]] inline std::vector<double> softmax(std::span<const double> scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

struct RegressionNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const RegressionNode&, const RegressionNode&) = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<RegressionNode> nodes) : nodes_(std::move(nodes)) {}

  [[nodiscard]] const std::vector<RegressionNode>& nodes() const noexcept { return nodes_; }

  [[nodiscard]] double predict(std::span<const double> x) const {
    const RegressionNode* node = &nodes_.front();
    while (!node->is_leaf()) node = &nodes_[x[node->feature] <= node->threshold ? node->left : node->right];
    return node->value;
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<RegressionNode> nodes_;
};

struct GbmParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_split = 2;

  friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

namespace detail {

/// Least-squares regression tree on residuals with the multiclass Newton
/// leaf value (K - 1) / K * sum(r) / sum(|r| (1 - |r|)).
class ResidualTreeBuilder {
 public:
  ResidualTreeBuilder(const FeatureMatrix& x, std::span<const double> residual, int num_classes, const GbmParams& p)
      : x_(x), r_(residual), k_(num_classes), params_(p) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(x_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(std::move(rows), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    int feature = -1;
    double threshold = 0.0;
    if (depth < params_.max_depth && static_cast<int>(rows.size()) >= params_.min_samples_split) {
      std::tie(feature, threshold) = best_split(rows);
    }
    if (feature < 0) {
      nodes_[id].value = leaf_value(rows);
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) (x_(r, feature) <= threshold ? left : right).push_back(r);
    nodes_[id].feature = feature;
    nodes_[id].threshold = threshold;
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = rr;
    return id;
  }

  double leaf_value(const std::vector<std::size_t>& rows) const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t r : rows) {
      const double v = r_[r];
      num += v;
      den += std::abs(v) * (1.0 - std::abs(v));
    }
    if (den <= 1e-12) return 0.0;
    return (k_ - 1.0) / k_ * num / den;
  }

  std::pair<int, double> best_split(const std::vector<std::size_t>& rows) const {
    const auto n = static_cast<double>(rows.size());
    double total = 0.0;
    for (std::size_t r : rows) total += r_[r];
    const double parent = total * total / n;
    double best_score = parent + 1e-12 * std::max(1.0, std::abs(parent));
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, double>> sorted(rows.size());
    for (int f = 0; f < static_cast<int>(x_.cols()); ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) sorted[i] = {x_(rows[i], f), r_[rows[i]]};
      std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      double left = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double right = total - left;
        const double score = left * left / nl + right * right / (n - nl);
        if (score > best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = split_midpoint(sorted[i].first, sorted[i + 1].first);
        }
      }
    }
    return {best_feature, best_threshold};
  }

  const FeatureMatrix& x_;
  std::span<const double> r_;
  int k_;
  GbmParams params_;
  std::vector<RegressionNode> nodes_;
};

}  // namespace detail

/// Multiclass gradient boosting on softmax cross-entropy.
class GradientBoosting {
 public:
  GradientBoosting() = default;
  GradientBoosting(GbmParams params, int num_features, std::vector<double> initial_scores,
                   std::vector<std::vector<RegressionTree>> rounds, std::vector<double> train_loss)
      : params_(params),
        num_features_(num_features),
        initial_scores_(std::move(initial_scores)),
        rounds_(std::move(rounds)),
        train_loss_(std::move(train_loss)) {}

  [[nodiscard]] const GbmParams& params() const noexcept { return params_; }
  [[nodiscard]] int num_classes() const noexcept { return static_cast<int>(initial_scores_.size()); }
  [[nodiscard]] int num_features() const noexcept { return num_features_; }
  [[nodiscard]] const std::vector<double>& initial_scores() const noexcept { return initial_scores_; }
  [[nodiscard]] const std::vector<std::vector<RegressionTree>>& rounds() const noexcept { return rounds_; }
  /// Mean training log-loss: entry 0 is the prior-only model, entry r the
  /// model after r rounds.
  [[nodiscard]] const std::vector<double>& train_loss() const noexcept { return train_loss_; }

  [[nodiscard]] std::vector<double> scores(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(num_features_)) {
      throw Error(ErrorCode::kDimensionMismatch, "boosting model expects " + std::to_string(num_features_) +
                                                     " features, got " + std::to_string(x.size()));
    }
    std::vector<double> s = initial_scores_;
    for (const auto& round : rounds_) {
      for (std::size_t c = 0; c < round.size(); ++c) s[c] += params_.learning_rate * round[c].predict(x);
    }
    return s;
  }

  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const { return softmax(scores(x)); }

  friend bool operator==(const GradientBoosting&, const GradientBoosting&) = default;

 private:
  GbmParams params_;
  int num_features_ = 0;
  std::vector<double> initial_scores_;
  std::vector<std::vector<RegressionTree>> rounds_;
  std::vector<double> train_loss_;
};

namespace detail {

inline double mean_log_loss(const std::vector<std::vector<double>>& scores, std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    const double top = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - top);
    loss += top + std::log(sum) - s[y[i]];
  }
  return loss / static_cast<double>(scores.size());
}

}  // namespace detail

/// Scores start at log class priors; every round fits one residual tree per
/// class against (one-hot - probability) and adds learning_rate times its
/// Newton leaf value.
[[nodiscard]] inline GradientBoosting fit_gbm(const FeatureMatrix& x, std::span<const int> y, int num_classes,
                                              const GbmParams& params = {}) {
  detail::check_training_set(x, y, num_classes);
  if (params.n_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "n_rounds must be >= 1");
  if (!(params.learning_rate >= 0.0 && params.learning_rate <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be in [0, 1]");
  }
  if (params.max_depth < 0 || params.min_samples_split < 2) {
    throw Error(ErrorCode::kInvalidArgument, "invalid boosting tree parameters");
  }
  const std::size_t n = x.rows();
  const auto k = static_cast<std::size_t>(num_classes);

  std::vector<double> prior(k, 0.0);
  for (int label : y) prior[label] += 1.0;
  std::vector<double> init(k);
  for (std::size_t c = 0; c < k; ++c) init[c] = std::log(std::max(prior[c] / static_cast<double>(n), 1e-12));

  std::vector<std::vector<double>> scores(n, init);
  std::vector<double> losses{detail::mean_log_loss(scores, y)};
  std::vector<std::vector<RegressionTree>> rounds;
  rounds.reserve(static_cast<std::size_t>(params.n_rounds));
  std::vector<std::vector<double>> residual(k, std::vector<double>(n));
  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = softmax(scores[i]);
      for (std::size_t c = 0; c < k; ++c) residual[c][i] = (y[i] == static_cast<int>(c) ? 1.0 : 0.0) - p[c];
    }
    std::vector<RegressionTree> trees;
    trees.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      trees.push_back(detail::ResidualTreeBuilder(x, residual[c], num_classes, params).build());
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) scores[i][c] += params.learning_rate * trees[c].predict(x.row(i));
    }
    rounds.push_back(std::move(trees));
    losses.push_back(detail::mean_log_loss(scores, y));
  }
  return GradientBoosting(params, static_cast<int>(x.cols()), std::move(init), std::move(rounds), std::move(losses));
}

}  // namespace wheatfx
