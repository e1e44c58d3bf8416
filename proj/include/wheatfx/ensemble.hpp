#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wheatfx/dataset.hpp"
#include "wheatfx/error.hpp"
#include "wheatfx/forest.hpp"
#include "wheatfx/gbm.hpp"
#include "wheatfx/logistic.hpp"
#include "wheatfx/rng.hpp"
#include "wheatfx/tree.hpp"

namespace wheatfx {

enum class BaseKind { kTree, kForest, kGbm };

inline std::string_view to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::kTree: return "tree";
    case BaseKind::kForest: return "forest";
    case BaseKind::kGbm: return "gbm";
  }
  return "tree";
}

using BaseModel = std::variant<DecisionTree, RandomForest, GradientBoosting>;

[[nodiscard]] inline std::vector<double> predict_proba(const BaseModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

[[nodiscard]] inline int num_classes(const BaseModel& model) {
  return std::visit([](const auto& m) { return m.num_classes(); }, model);
}

[[nodiscard]] inline int num_features(const BaseModel& model) {
  return std::visit([](const auto& m) { return m.num_features(); }, model);
}

/// Hyperparameters for every base learner kind.
struct BaseParams {
  TreeParams tree;
  ForestParams forest;
  GbmParams gbm;

  friend bool operator==(const BaseParams&, const BaseParams&) = default;
};

[[nodiscard]] inline BaseModel fit_base(BaseKind kind, const BaseParams& params, const FeatureMatrix& x,
                                        std::span<const int> y, int num_classes, std::uint64_t seed) {
  switch (kind) {
    case BaseKind::kTree: return fit_tree(x, y, num_classes, params.tree);
    case BaseKind::kForest: return fit_forest(x, y, num_classes, params.forest, seed);
    case BaseKind::kGbm: return fit_gbm(x, y, num_classes, params.gbm);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown base learner");
}

enum class VotingMode { kHard, kSoft };

class VotingEnsemble {
 public:
  VotingEnsemble() = default;
  VotingEnsemble(std::vector<BaseModel> bases, VotingMode mode) : bases_(std::move(bases)), mode_(mode) {}

  [[nodiscard]] const std::vector<BaseModel>& bases() const noexcept { return bases_; }
  [[nodiscard]] VotingMode mode() const noexcept { return mode_; }
  [[nodiscard]] int num_classes() const { return wheatfx::num_classes(bases_.front()); }
  [[nodiscard]] int num_features() const { return wheatfx::num_features(bases_.front()); }

  /// Hard: one-hot of the majority vote of the bases' argmax classes (ties
  /// to the lowest class id). Soft: mean of the bases' probabilities.
  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const {
    const auto k = static_cast<std::size_t>(num_classes());
    std::vector<double> acc(k, 0.0);
    for (const auto& base : bases_) {
      const auto p = wheatfx::predict_proba(base, x);
      if (mode_ == VotingMode::kHard) {
        acc[static_cast<std::size_t>(argmax(p))] += 1.0;
      } else {
        for (std::size_t c = 0; c < k; ++c) acc[c] += p[c];
      }
    }
    if (mode_ == VotingMode::kHard) {
      const int winner = argmax(acc);
      std::fill(acc.begin(), acc.end(), 0.0);
      acc[static_cast<std::size_t>(winner)] = 1.0;
      return acc;
    }
    for (double& v : acc) v /= static_cast<double>(bases_.size());
    return acc;
  }

  friend bool operator==(const VotingEnsemble&, const VotingEnsemble&) = default;

 private:
  std::vector<BaseModel> bases_;
  VotingMode mode_ = VotingMode::kHard;
};

[[nodiscard]] inline VotingEnsemble fit_voting(std::vector<BaseModel> bases, VotingMode mode = VotingMode::kHard) {
  if (bases.size() < 2) throw Error(ErrorCode::kInvalidArgument, "voting needs at least two base models");
  const int k = num_classes(bases.front());
  const int d = num_features(bases.front());
  for (const auto& b : bases) {
    if (num_classes(b) != k) throw Error(ErrorCode::kClassSetMismatch, "base models disagree on the class set");
    if (num_features(b) != d) throw Error(ErrorCode::kDimensionMismatch, "base models disagree on feature count");
  }
  return VotingEnsemble(std::move(bases), mode);
}

/// Concatenated base probabilities, |bases| * K values.
[[nodiscard]] inline std::vector<double> meta_features(std::span<const BaseModel> bases, std::span<const double> x) {
  std::vector<double> out;
  for (const auto& b : bases) {
    const auto p = predict_proba(b, x);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

class StackingEnsemble {
 public:
  StackingEnsemble() = default;
  StackingEnsemble(std::vector<BaseKind> kinds, std::vector<BaseModel> bases, LogisticRegression meta, int folds,
                   std::uint64_t seed)
      : kinds_(std::move(kinds)), bases_(std::move(bases)), meta_(std::move(meta)), folds_(folds), seed_(seed) {}

  [[nodiscard]] const std::vector<BaseKind>& kinds() const noexcept { return kinds_; }
  [[nodiscard]] const std::vector<BaseModel>& bases() const noexcept { return bases_; }
  [[nodiscard]] const LogisticRegression& meta() const noexcept { return meta_; }
  [[nodiscard]] int folds() const noexcept { return folds_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] int num_classes() const { return meta_.num_classes(); }
  [[nodiscard]] int num_features() const { return wheatfx::num_features(bases_.front()); }

  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const {
    return meta_.predict_proba(meta_features(bases_, x));
  }

  friend bool operator==(const StackingEnsemble&, const StackingEnsemble&) = default;

 private:
  std::vector<BaseKind> kinds_;
  std::vector<BaseModel> bases_;
  LogisticRegression meta_;
  int folds_ = 5;
  std::uint64_t seed_ = 0;
};

/// Bookkeeping of the out-of-fold protocol, for auditing.
struct StackingTrace {
  FoldPlan folds;
  /// Row i holds base predictions for training row i, produced by models fit
  /// without the fold that contains i.
  FeatureMatrix meta_features;
  std::vector<double> meta_loss;
};

/// Seeds: folds use Rng(seed).split(0); base b in fold f uses
/// Rng(seed).split(f + 1).split(b); the final refit of base b uses
/// Rng(seed).split(k + 1).split(b).
[[nodiscard]] inline StackingEnsemble fit_stacking(const FeatureMatrix& x, std::span<const int> y, int num_classes,
                                                   const std::vector<BaseKind>& kinds, const BaseParams& params,
                                                   int k, std::uint64_t seed, const LogisticParams& meta_params = {},
                                                   StackingTrace* trace = nullptr) {
  detail::check_training_set(x, y, num_classes);
  if (kinds.empty()) throw Error(ErrorCode::kInvalidArgument, "stacking needs at least one base learner");
  const Rng root(seed);
  FoldPlan plan = stratified_kfold(y, k, root.split(0).seed());

  const std::size_t width = kinds.size() * static_cast<std::size_t>(num_classes);
  FeatureMatrix meta_x(x.rows(), width);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto train_rows = plan.training_indices(f);
    const FeatureMatrix fold_x = x.select_rows(train_rows);
    const auto fold_y = select<int>(y, train_rows);
    const Rng fold_rng = root.split(f + 1);
    std::vector<BaseModel> fold_bases;
    for (std::size_t b = 0; b < kinds.size(); ++b) {
      fold_bases.push_back(fit_base(kinds[b], params, fold_x, fold_y, num_classes, fold_rng.split(b).seed()));
    }
    for (std::size_t row : plan.folds[f]) {
      const auto m = meta_features(fold_bases, x.row(row));
      std::copy(m.begin(), m.end(), meta_x.row(row).begin());
    }
  }

  std::vector<double> meta_loss;
  LogisticRegression meta = fit_logistic(meta_x, y, num_classes, meta_params, &meta_loss);

  const Rng final_rng = root.split(plan.folds.size() + 1);
  std::vector<BaseModel> bases;
  for (std::size_t b = 0; b < kinds.size(); ++b) {
    bases.push_back(fit_base(kinds[b], params, x, y, num_classes, final_rng.split(b).seed()));
  }
  if (trace != nullptr) *trace = StackingTrace{std::move(plan), std::move(meta_x), std::move(meta_loss)};
  return StackingEnsemble(kinds, std::move(bases), std::move(meta), k, seed);
}

}  // namespace wheatfx
