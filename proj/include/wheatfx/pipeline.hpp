#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wheatfx/config.hpp"
#include "wheatfx/dataset.hpp"
#include "wheatfx/image_io.hpp"
#include "wheatfx/metrics.hpp"
#include "wheatfx/model.hpp"
#include "wheatfx/serialization.hpp"

namespace wheatfx {

/// Seed stream used for model fitting; the split uses the config seed itself.
inline constexpr std::uint64_t kModelSeedStream = 0x6d6f64656c;

[[nodiscard]] inline std::uint64_t model_seed(std::uint64_t config_seed) {
  return Rng(config_seed).split(kModelSeedStream).seed();
}

struct LabeledMatrix {
  FeatureMatrix x;
  std::vector<int> y;
};

[[nodiscard]] inline LabeledMatrix to_matrix(const Dataset& ds, std::span<const std::size_t> rows) {
  LabeledMatrix out{FeatureMatrix(rows.size(), kFeatureCount), {}};
  out.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = ds.samples[rows[i]];
    std::copy(s.features.values.begin(), s.features.values.end(), out.x.row(i).begin());
    out.y.push_back(s.label);
  }
  return out;
}

[[nodiscard]] inline LabeledMatrix to_matrix(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return to_matrix(ds, rows);
}

struct SamplePrediction {
  std::string source;
  int label = 0;
  int predicted = 0;
  std::vector<double> probabilities;
};

struct Evaluation {
  ConfusionMatrix confusion;
  MetricsReport report;
  std::vector<SamplePrediction> predictions;
};

/// Raw (unstandardized) samples are standardized with the model file's stats.
[[nodiscard]] inline Evaluation evaluate_rows(const ModelFile& mf, const Dataset& raw, std::span<const std::size_t> rows) {
  std::vector<int> truth;
  std::vector<int> predicted;
  Evaluation ev;
  for (std::size_t r : rows) {
    const auto& s = raw.samples[r];
    FeatureVector v = s.features;
    mf.standardization.apply_in_place(v.values);
    auto p = predict_proba(mf.model, v.values);
    const int cls = argmax(p);
    truth.push_back(s.label);
    predicted.push_back(cls);
    ev.predictions.push_back({s.source, s.label, cls, std::move(p)});
  }
  ev.confusion = confusion(truth, predicted, static_cast<int>(mf.class_names.size()));
  ev.report = report(ev.confusion);
  return ev;
}

[[nodiscard]] inline Evaluation evaluate_dataset(const ModelFile& mf, const Dataset& raw) {
  if (raw.class_names != mf.class_names) {
    throw Error(ErrorCode::kClassSetMismatch, "dataset classes differ from the model's classes");
  }
  std::vector<std::size_t> rows(raw.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return evaluate_rows(mf, raw, rows);
}

struct TrainOutcome {
  ModelFile model;
  SplitPlan plan;
  Evaluation test;
};

/// Stratified split with the config seed, standardization fitted on the
/// training rows, fit, and evaluation on the held-out rows.
[[nodiscard]] inline TrainOutcome train_and_evaluate(const Dataset& raw, const PipelineConfig& config) {
  validate(config);
  TrainOutcome out;
  out.plan = split(raw, config.test_fraction, config.seed);
  const Standardization st = fit_standardization(raw, out.plan.train);
  const Dataset scaled = apply_standardization(raw, st);
  const auto train = to_matrix(scaled, out.plan.train);
  out.model.config = config;
  out.model.class_names = raw.class_names;
  out.model.standardization = st;
  out.model.model = fit_model(config.model, train.x, train.y, raw.num_classes(), model_seed(config.seed));
  out.test = evaluate_rows(out.model, raw, out.plan.test);
  return out;
}

inline json predictions_to_json(const std::vector<SamplePrediction>& preds, const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto& p : preds) {
    out.push_back({{"source", p.source},
                   {"label", names.at(p.label)},
                   {"predicted", names.at(p.predicted)},
                   {"probabilities", p.probabilities}});
  }
  return out;
}

/// Machine-readable training report.
[[nodiscard]] inline json train_report_json(const TrainOutcome& o) {
  const auto& names = o.model.class_names;
  return json{{"kind", "train"},
              {"model_kind", kind_of(o.model.model)},
              {"class_names", names},
              {"seed", o.model.config.seed},
              {"train_size", o.plan.train.size()},
              {"test_size", o.plan.test.size()},
              {"confusion", confusion_to_json(o.test.confusion)},
              {"report", report_to_json(o.test.report, names)},
              {"predictions", predictions_to_json(o.test.predictions, names)}};
}

struct CrossValidation {
  std::vector<ConfusionMatrix> confusions;
  std::vector<MetricsReport> reports;
  MetricSummary accuracy;
  MetricSummary macro_precision;
  MetricSummary macro_recall;
  MetricSummary macro_f1;
};

/// Fold f trains on every other fold (standardized with its own training
/// statistics) and is evaluated on fold f. Summaries are mean and
/// population std over folds.
[[nodiscard]] inline CrossValidation cross_validate(const Dataset& raw, const FoldPlan& folds, const ModelSpec& spec,
                                                    std::uint64_t seed) {
  CrossValidation cv;
  const Rng root(seed);
  for (std::size_t f = 0; f < folds.k(); ++f) {
    const auto train_rows = folds.training_indices(f);
    const Standardization st = fit_standardization(raw, train_rows);
    const Dataset scaled = apply_standardization(raw, st);
    const auto train = to_matrix(scaled, train_rows);
    ModelFile mf;
    mf.class_names = raw.class_names;
    mf.standardization = st;
    mf.model = fit_model(spec, train.x, train.y, raw.num_classes(), root.split(f).seed());
    auto ev = evaluate_rows(mf, raw, folds.folds[f]);
    cv.confusions.push_back(std::move(ev.confusion));
    cv.reports.push_back(std::move(ev.report));
  }
  auto collect = [&](auto member) {
    std::vector<double> v;
    for (const auto& r : cv.reports) v.push_back(r.*member);
    return summarize(v);
  };
  cv.accuracy = collect(&MetricsReport::accuracy);
  cv.macro_precision = collect(&MetricsReport::macro_precision);
  cv.macro_recall = collect(&MetricsReport::macro_recall);
  cv.macro_f1 = collect(&MetricsReport::macro_f1);
  return cv;
}

[[nodiscard]] inline json cross_validation_json(const CrossValidation& cv, const ModelSpec& spec,
                                                const std::vector<std::string>& names, std::uint64_t seed) {
  json folds = json::array();
  for (std::size_t f = 0; f < cv.reports.size(); ++f) {
    folds.push_back({{"fold", f}, {"confusion", confusion_to_json(cv.confusions[f])},
                     {"report", report_to_json(cv.reports[f], names)}});
  }
  auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
  return json{{"kind", "cross_validation"},
              {"model_kind", spec.kind},
              {"class_names", names},
              {"seed", seed},
              {"k", cv.reports.size()},
              {"folds", std::move(folds)},
              {"summary",
               {{"accuracy", summary(cv.accuracy)},
                {"macro_precision", summary(cv.macro_precision)},
                {"macro_recall", summary(cv.macro_recall)},
                {"macro_f1", summary(cv.macro_f1)}}}};
}

struct ImagePrediction {
  int label = 0;
  std::string class_name;
  std::vector<double> probabilities;
  FeatureVector features;
};

/// Extraction with the model's embedded settings, then standardization with
/// its stored statistics.
[[nodiscard]] inline ImagePrediction predict_image(const ModelFile& mf, const std::filesystem::path& image) {
  const auto extraction = extract(load_image(image), mf.config.extraction);
  ImagePrediction out;
  out.features = extraction.features;
  FeatureVector v = extraction.features;
  mf.standardization.apply_in_place(v.values);
  out.probabilities = predict_proba(mf.model, v.values);
  out.label = argmax(out.probabilities);
  out.class_name = mf.class_names.at(static_cast<std::size_t>(out.label));
  return out;
}

}  // namespace wheatfx
