#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wheatfx/ensemble.hpp"
#include "wheatfx/error.hpp"

namespace wheatfx {

enum class ModelKind { kTree, kForest, kGbm, kVoting, kStacking };

inline std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTree: return "tree";
    case ModelKind::kForest: return "forest";
    case ModelKind::kGbm: return "gbm";
    case ModelKind::kVoting: return "voting";
    case ModelKind::kStacking: return "stacking";
  }
  return "tree";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::kTree, ModelKind::kForest, ModelKind::kGbm, ModelKind::kVoting, ModelKind::kStacking}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

inline std::optional<BaseKind> parse_base_kind(std::string_view name) {
  for (auto k : {BaseKind::kTree, BaseKind::kForest, BaseKind::kGbm}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

/// Everything needed to fit one model of any kind.
struct ModelSpec {
  ModelKind kind = ModelKind::kStacking;
  BaseParams base;
  /// Members of voting and stacking ensembles.
  std::vector<BaseKind> ensemble_bases = {BaseKind::kTree, BaseKind::kForest, BaseKind::kGbm};
  VotingMode voting_mode = VotingMode::kHard;
  int stacking_folds = 5;
  LogisticParams meta;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

using Model = std::variant<DecisionTree, RandomForest, GradientBoosting, VotingEnsemble, StackingEnsemble>;

[[nodiscard]] inline ModelKind kind_of(const Model& model) {
  return static_cast<ModelKind>(model.index());
}

[[nodiscard]] inline std::vector<double> predict_proba(const Model& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

[[nodiscard]] inline int predict_class(const Model& model, std::span<const double> x) {
  return argmax(predict_proba(model, x));
}

[[nodiscard]] inline int num_classes(const Model& model) {
  return std::visit([](const auto& m) { return m.num_classes(); }, model);
}

/// Voting member b is seeded with Rng(seed).split(b); a lone forest uses
/// `seed` directly; stacking derives its own streams from `seed`.
[[nodiscard]] inline Model fit_model(const ModelSpec& spec, const FeatureMatrix& x, std::span<const int> y,
                                     int num_classes, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::kTree: return fit_tree(x, y, num_classes, spec.base.tree);
    case ModelKind::kForest: return fit_forest(x, y, num_classes, spec.base.forest, seed);
    case ModelKind::kGbm: return fit_gbm(x, y, num_classes, spec.base.gbm);
    case ModelKind::kVoting: {
      const Rng root(seed);
      std::vector<BaseModel> bases;
      for (std::size_t b = 0; b < spec.ensemble_bases.size(); ++b) {
        bases.push_back(fit_base(spec.ensemble_bases[b], spec.base, x, y, num_classes, root.split(b).seed()));
      }
      return fit_voting(std::move(bases), spec.voting_mode);
    }
    case ModelKind::kStacking:
      return fit_stacking(x, y, num_classes, spec.ensemble_bases, spec.base, spec.stacking_folds, seed, spec.meta);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model kind");
}

}  // namespace wheatfx
