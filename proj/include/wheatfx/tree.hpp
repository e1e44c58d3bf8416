#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/rng.hpp"

namespace wheatfx {

/// Dense row-major design matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error(ErrorCode::kDimensionMismatch, "matrix data size");
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  [[nodiscard]] FeatureMatrix select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(row(rows[i]).begin(), cols_, out.row(i).begin());
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

template <typename T>
[[nodiscard]] std::vector<T> select(std::span<const T> values, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

/// Index of the largest entry; ties go to the lowest index.
[[nodiscard]] inline int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

struct TreeParams {
  int max_depth = 12;
  int min_samples_split = 2;
  double min_impurity_decrease = 0.0;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

/// Internal nodes have feature >= 0 and send x[feature] <= threshold left.
/// Leaves have feature == -1 and carry class counts and probabilities.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::uint64_t> class_counts;
  std::vector<double> probabilities;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(int num_classes, int num_features, TreeParams params, std::vector<TreeNode> nodes)
      : num_classes_(num_classes), num_features_(num_features), params_(params), nodes_(std::move(nodes)) {}

  [[nodiscard]] int num_classes() const noexcept { return num_classes_; }
  [[nodiscard]] int num_features() const noexcept { return num_features_; }
  [[nodiscard]] const TreeParams& params() const noexcept { return params_; }
  [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const TreeNode& root() const { return nodes_.front(); }

  [[nodiscard]] const TreeNode& leaf_for(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(num_features_)) {
      throw Error(ErrorCode::kDimensionMismatch, "tree expects " + std::to_string(num_features_) +
                                                     " features, got " + std::to_string(x.size()));
    }
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) node = &nodes_[x[node->feature] <= node->threshold ? node->left : node->right];
    return *node;
  }

  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const { return leaf_for(x).probabilities; }

  [[nodiscard]] int depth() const { return depth_from(0); }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  [[nodiscard]] int depth_from(int i) const {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  int num_classes_ = 0;
  int num_features_ = 0;
  TreeParams params_;
  std::vector<TreeNode> nodes_;
};

/// Candidate threshold between two consecutive distinct sorted values. Falls
/// back to the lower value when the midpoint rounds up to the upper one.
[[nodiscard]] inline double split_midpoint(double lo, double hi) noexcept {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

namespace detail {

using Int128 = __int128;

/// Gini split score kept as an exact fraction num / den with
/// num = SL * NR + SR * NL and den = NL * NR, where SL and SR are sums of
/// squared class counts. Maximizing it maximizes the Gini decrease.
struct GiniScore {
  Int128 num = 0;
  Int128 den = 1;

  [[nodiscard]] bool better_than(const GiniScore& o) const noexcept { return num * o.den > o.num * den; }
};

class CartBuilder {
 public:
  CartBuilder(const FeatureMatrix& x, std::span<const int> y, int num_classes, const TreeParams& params,
              int max_features, Rng* rng)
      : x_(x), y_(y), k_(num_classes), params_(params), max_features_(max_features), rng_(rng) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    total_ = rows.size();
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    GiniScore score;
  };

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(k_), 0);
    for (std::size_t r : rows) ++counts[y_[r]];

    const auto n = static_cast<std::int64_t>(rows.size());
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    if (depth >= params_.max_depth || n < params_.min_samples_split || pure) {
      make_leaf(id, counts);
      return id;
    }
    const auto split = best_split(rows, counts);
    if (split.feature < 0) {
      make_leaf(id, counts);
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void make_leaf(int id, const std::vector<std::uint64_t>& counts) {
    TreeNode& node = nodes_[id];
    node.feature = -1;
    node.class_counts = counts;
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    node.probabilities.assign(counts.size(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
      node.probabilities[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
    }
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(x_.cols());
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    if (rng_ == nullptr || max_features_ <= 0 || max_features_ >= d) return features;
    // Partial Fisher-Yates: the first max_features_ entries are a uniform
    // random subset.
    for (int i = 0; i < max_features_; ++i) {
      const auto j = i + static_cast<int>(rng_->uniform_index(static_cast<std::uint64_t>(d - i)));
      std::swap(features[i], features[j]);
    }
    features.resize(static_cast<std::size_t>(max_features_));
    std::sort(features.begin(), features.end());
    return features;
  }

  Split best_split(const std::vector<std::size_t>& rows, const std::vector<std::uint64_t>& counts) {
    const auto n = static_cast<Int128>(rows.size());
    Int128 sum_sq = 0;
    for (auto c : counts) sum_sq += static_cast<Int128>(c) * c;

    Split best;
    std::vector<std::pair<double, int>> sorted(rows.size());
    std::vector<std::int64_t> left(static_cast<std::size_t>(k_));
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) sorted[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      std::fill(left.begin(), left.end(), 0);
      Int128 sl = 0;
      Int128 sr = sum_sq;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const int c = sorted[i].second;
        const auto lc = static_cast<Int128>(left[c]);
        const auto rc = static_cast<Int128>(counts[c]) - lc;
        sl += 2 * lc + 1;   // (lc + 1)^2 - lc^2
        sr -= 2 * rc - 1;   // (rc - 1)^2 - rc^2
        ++left[c];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const Int128 nl = static_cast<Int128>(i + 1);
        const Int128 nr = n - nl;
        const GiniScore score{sl * nr + sr * nl, nl * nr};
        // Positive decrease: score > S / N.
        if (score.num * n <= sum_sq * score.den) continue;
        if (best.feature >= 0 && !score.better_than(best.score)) continue;
        if (params_.min_impurity_decrease > 0.0) {
          const double decrease = (static_cast<double>(score.num) / static_cast<double>(score.den) -
                                   static_cast<double>(sum_sq) / static_cast<double>(n)) /
                                  static_cast<double>(total_);
          if (decrease < params_.min_impurity_decrease) continue;
        }
        best = {f, split_midpoint(sorted[i].first, sorted[i + 1].first), score};
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  int k_;
  TreeParams params_;
  int max_features_;
  Rng* rng_;
  std::size_t total_ = 0;
  std::vector<TreeNode> nodes_;
};

inline void check_training_set(const FeatureMatrix& x, std::span<const int> y, int num_classes) {
  if (x.rows() == 0 || y.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training rows");
  if (x.rows() != y.size()) throw Error(ErrorCode::kLengthMismatch, "feature rows and labels differ in length");
  if (num_classes < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one class");
  for (int label : y) {
    if (label < 0 || label >= num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(label));
    }
  }
}

inline void check_tree_params(const TreeParams& p) {
  if (p.max_depth < 0) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 0");
  if (p.min_samples_split < 2) throw Error(ErrorCode::kInvalidArgument, "min_samples_split must be >= 2");
  if (p.min_impurity_decrease < 0.0) throw Error(ErrorCode::kInvalidArgument, "min_impurity_decrease must be >= 0");
}

}  // namespace detail

/// Greedy CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct values; ties go to the lower feature, then the lower
/// threshold. `rows` selects (possibly repeated) training rows; empty means
/// all rows. `max_features` > 0 samples that many features per node from
/// `rng`.
[[nodiscard]] inline DecisionTree fit_tree(const FeatureMatrix& x, std::span<const int> y, int num_classes,
                                           const TreeParams& params = {}, std::vector<std::size_t> rows = {},
                                           int max_features = 0, Rng* rng = nullptr) {
  detail::check_training_set(x, y, num_classes);
  detail::check_tree_params(params);
  if (rows.empty()) {
    rows.resize(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  detail::CartBuilder builder(x, y, num_classes, params, max_features, rng);
  return DecisionTree(num_classes, static_cast<int>(x.cols()), params, builder.build(std::move(rows)));
}

}  // namespace wheatfx
