#pragma once

#include <cstdint>
#include <string>

#include "wheatfx/error.hpp"
#include "wheatfx/features.hpp"
#include "wheatfx/model.hpp"
#include "wheatfx/segmentation.hpp"

namespace wheatfx {

/// Every tunable of the pipeline. Model files embed a copy so inference
/// always reuses the extraction settings the model was trained with.
struct PipelineConfig {
  ExtractionConfig extraction;
  ModelSpec model;
  double test_fraction = 0.2;
  int folds = 5;
  std::uint64_t seed = 42;
  int workers = 1;
};

/// Throws InvalidArgument / InvalidThresholds naming the offending field.
inline void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  const auto& e = c.extraction;
  if (!(e.canny.low >= 0.0) || e.canny.low > e.canny.high || !(e.canny.high <= kMaxSobelMagnitude)) {
    throw Error(ErrorCode::kInvalidThresholds, "canny thresholds need 0 <= low <= high <= 1020");
  }
  if (!(e.canny.sigma > 0.0)) fail("canny sigma must be > 0");
  if (e.seg_threshold < 0 || e.seg_threshold > 255) {
    throw Error(ErrorCode::kInvalidThresholds, "segmentation threshold must be in [0, 255]");
  }
  if (e.glcm.distance < 1) fail("glcm distance must be >= 1");
  if (e.glcm.levels < 2 || e.glcm.levels > 256) fail("glcm levels must be in [2, 256]");
  if (e.glcm.directions.empty()) fail("glcm needs at least one direction");
  for (const auto& d : e.glcm.directions) {
    if (d.dx == 0 && d.dy == 0) fail("glcm direction (0, 0) is not an offset");
  }
  if (e.working_size < 1) fail("working size must be >= 1");

  const auto& m = c.model;
  if (m.base.tree.max_depth < 0) fail("tree max_depth must be >= 0");
  if (m.base.tree.min_samples_split < 2) fail("tree min_samples_split must be >= 2");
  if (m.base.tree.min_impurity_decrease < 0.0) fail("tree min_impurity_decrease must be >= 0");
  if (m.base.forest.n_trees < 1) fail("forest n_trees must be >= 1");
  if (m.base.forest.max_features < 0) fail("forest max_features must be >= 0");
  if (m.base.forest.tree.max_depth < 0 || m.base.forest.tree.min_samples_split < 2) fail("invalid forest tree params");
  if (m.base.gbm.n_rounds < 1) fail("gbm rounds must be >= 1");
  if (!(m.base.gbm.learning_rate >= 0.0 && m.base.gbm.learning_rate <= 1.0)) fail("gbm learning rate must be in [0, 1]");
  if (m.base.gbm.max_depth < 0 || m.base.gbm.min_samples_split < 2) fail("invalid gbm tree params");
  if (m.kind == ModelKind::kVoting && m.ensemble_bases.size() < 2) fail("voting needs at least two bases");
  if (m.kind == ModelKind::kStacking && m.ensemble_bases.empty()) fail("stacking needs at least one base");
  if (m.stacking_folds < 2) fail("stacking folds must be >= 2");
  if (!(m.meta.step > 0.0) || m.meta.iterations < 0 || m.meta.l2 < 0.0) fail("invalid meta-learner params");

  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) fail("test fraction must be in (0, 1)");
  if (c.folds < 2) fail("folds must be >= 2");
  if (c.workers < 1) fail("workers must be >= 1");
}

}  // namespace wheatfx
