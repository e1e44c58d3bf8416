// wheatfx command-line tool: extract features, train, evaluate, predict and
// render reports.
//
// Exit codes: 0 success, 1 data error, 2 usage error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wheatfx/wheatfx.hpp"

namespace fs = std::filesystem;
using namespace wheatfx;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct CliState {
  PipelineConfig config;
  std::string model_kind = "stacking";
  std::string voting_mode = "hard";
  std::vector<std::string> ensemble_bases = {"tree", "forest", "gbm"};
  std::vector<int> glcm_directions = {0, 45, 90, 135};
};

Offset direction_for_degrees(int deg) {
  switch (deg) {
    case 0: return {1, 0};
    case 45: return {1, -1};
    case 90: return {0, -1};
    default: return {-1, -1};
  }
}

void add_pipeline_options(CLI::App& app, CliState& s) {
  auto& e = s.config.extraction;
  auto& m = s.config.model;
  const std::string extraction = "Extraction";
  app.add_option("--canny-low", e.canny.low, "Canny low threshold (Sobel L2 scale, 0..1020)")
      ->capture_default_str()->group(extraction);
  app.add_option("--canny-high", e.canny.high, "Canny high threshold")->capture_default_str()->group(extraction);
  app.add_option("--canny-sigma", e.canny.sigma, "Canny Gaussian sigma")->capture_default_str()->group(extraction);
  app.add_option("--seg-threshold", e.seg_threshold, "Foreground threshold (pixel >= t)")
      ->capture_default_str()->check(CLI::Range(0, 255))->group(extraction);
  app.add_option("--glcm-distance", e.glcm.distance, "GLCM pixel distance")
      ->capture_default_str()->check(CLI::PositiveNumber)->group(extraction);
  app.add_option("--glcm-levels", e.glcm.levels, "GLCM quantization levels")
      ->capture_default_str()->check(CLI::Range(2, 256))->group(extraction);
  app.add_option("--glcm-directions", s.glcm_directions, "GLCM directions in degrees")
      ->capture_default_str()->check(CLI::IsMember({0, 45, 90, 135}))->delimiter(',')->group(extraction);
  app.add_flag("--glcm-whole-image", e.glcm_whole_image, "Compute the GLCM over the whole image instead of the ROI")
      ->group(extraction);
  app.add_option("--working-size", e.working_size, "Square working resolution")
      ->capture_default_str()->check(CLI::PositiveNumber)->group(extraction);
  app.add_option("--workers", s.config.workers, "Extraction threads")
      ->capture_default_str()->check(CLI::PositiveNumber)->group(extraction);

  const std::string learning = "Learning";
  app.add_option("--model", s.model_kind, "Model kind")
      ->capture_default_str()->check(CLI::IsMember({"tree", "forest", "gbm", "voting", "stacking"}))->group(learning);
  app.add_option("--seed", s.config.seed, "Seed for splits and model fitting")->capture_default_str()->group(learning);
  app.add_option("--test-fraction", s.config.test_fraction, "Held-out fraction")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0))->group(learning);
  app.add_option("--folds", s.config.folds, "Cross-validation folds")->capture_default_str()->group(learning);
  app.add_option("--tree-max-depth", m.base.tree.max_depth, "Decision tree max depth")
      ->capture_default_str()->group(learning);
  app.add_option("--tree-min-samples-split", m.base.tree.min_samples_split, "Decision tree min samples to split")
      ->capture_default_str()->group(learning);
  app.add_option("--forest-trees", m.base.forest.n_trees, "Random forest size")->capture_default_str()->group(learning);
  app.add_option("--forest-max-features", m.base.forest.max_features, "Features per split (0 = ceil(sqrt(d)))")
      ->capture_default_str()->group(learning);
  app.add_option("--forest-max-depth", m.base.forest.tree.max_depth, "Random forest tree max depth")
      ->capture_default_str()->group(learning);
  app.add_option("--gbm-rounds", m.base.gbm.n_rounds, "Boosting rounds")->capture_default_str()->group(learning);
  app.add_option("--gbm-learning-rate", m.base.gbm.learning_rate, "Boosting learning rate")
      ->capture_default_str()->group(learning);
  app.add_option("--gbm-max-depth", m.base.gbm.max_depth, "Boosting tree depth")->capture_default_str()->group(learning);
  app.add_option("--voting-mode", s.voting_mode, "Voting mode")
      ->capture_default_str()->check(CLI::IsMember({"hard", "soft"}))->group(learning);
  app.add_option("--ensemble-bases", s.ensemble_bases, "Base learners of voting/stacking")
      ->capture_default_str()->check(CLI::IsMember({"tree", "forest", "gbm"}))->delimiter(',')->group(learning);
  app.add_option("--stacking-folds", m.stacking_folds, "Out-of-fold splits for stacking")
      ->capture_default_str()->group(learning);
  app.add_option("--meta-step", m.meta.step, "Meta-learner gradient step")->capture_default_str()->group(learning);
  app.add_option("--meta-iterations", m.meta.iterations, "Meta-learner iterations")
      ->capture_default_str()->group(learning);
  app.add_option("--meta-l2", m.meta.l2, "Meta-learner L2 penalty")->capture_default_str()->group(learning);
}

void finalize(CliState& s) {
  auto& m = s.config.model;
  m.kind = *parse_model_kind(s.model_kind);
  m.voting_mode = s.voting_mode == "soft" ? VotingMode::kSoft : VotingMode::kHard;
  m.ensemble_bases.clear();
  for (const auto& b : s.ensemble_bases) m.ensemble_bases.push_back(*parse_base_kind(b));
  s.config.extraction.glcm.directions.clear();
  for (int d : s.glcm_directions) s.config.extraction.glcm.directions.push_back(direction_for_degrees(d));
  validate(s.config);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path extraction_sidecar(const fs::path& csv) { return fs::path(csv.string() + ".extraction.json"); }

/// Feature CSV or dataset directory. For a CSV, the extraction settings
/// recorded next to it by `extract` replace those in `config`, so a trained
/// model embeds the settings its features were really computed with.
Dataset load_dataset(const fs::path& input, PipelineConfig& config) {
  if (fs::is_directory(input)) {
    IngestOptions opt;
    opt.extraction = config.extraction;
    opt.workers = config.workers;
    auto result = ingest_directory(input, opt);
    for (const auto& s : result.skipped) std::cerr << "warning: skipped " << s.path << ": " << s.reason << '\n';
    return std::move(result.dataset);
  }
  Dataset ds = read_feature_csv(input);
  const fs::path sidecar = extraction_sidecar(input);
  if (fs::exists(sidecar)) {
    try {
      config.extraction = json::parse(read_text(sidecar)).get<ExtractionConfig>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, sidecar.string() + ": " + e.what());
    }
  } else {
    std::cerr << "warning: " << sidecar.string() << " not found; assuming the current extraction settings\n";
  }
  return ds;
}

std::string class_summary(const Dataset& ds) {
  std::vector<std::size_t> counts(ds.class_names.size(), 0);
  for (const auto& s : ds.samples) ++counts[s.label];
  std::string out;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c > 0) out += ", ";
    out += ds.class_names[c] + "=" + std::to_string(counts[c]);
  }
  return out;
}

int run_extract(const CliState& s, const fs::path& dataset_dir, const fs::path& out_csv,
                const std::string& debug_dir) {
  IngestOptions opt;
  opt.extraction = s.config.extraction;
  opt.workers = s.config.workers;
  if (!debug_dir.empty()) opt.debug_dir = fs::path(debug_dir);
  const auto result = ingest_directory(dataset_dir, opt);
  for (const auto& sk : result.skipped) std::cerr << "warning: skipped " << sk.path << ": " << sk.reason << '\n';
  write_feature_csv(out_csv, result.dataset);
  write_text(extraction_sidecar(out_csv), json(s.config.extraction).dump(1) + "\n");
  std::cout << "extracted " << result.dataset.size() << " samples (" << class_summary(result.dataset) << "), skipped "
            << result.skipped.size() << '\n';
  return 0;
}

void emit_outputs(const json& report, const ConfusionMatrix& cm, const std::vector<std::string>& names,
                  const std::string& report_path, const std::string& confusion_path) {
  if (!report_path.empty()) write_text(report_path, report.dump(1) + "\n");
  if (!confusion_path.empty()) write_text(confusion_path, confusion_csv(cm, names));
}

int run_train(const CliState& s, const fs::path& input, const fs::path& model_out, const std::string& report_path,
              const std::string& confusion_path) {
  PipelineConfig config = s.config;
  const Dataset ds = load_dataset(input, config);
  const auto outcome = train_and_evaluate(ds, config);
  save_model(model_out, outcome.model);
  std::cout << "trained " << to_string(s.config.model.kind) << " on " << outcome.plan.train.size()
            << " samples, tested on " << outcome.plan.test.size() << "\n\n"
            << format_report(outcome.test.report, ds.class_names);
  emit_outputs(train_report_json(outcome), outcome.test.confusion, ds.class_names, report_path, confusion_path);
  return 0;
}

int run_evaluate(const CliState& s, const fs::path& input, const std::string& model_file,
                 const std::string& report_path, const std::string& confusion_path) {
  if (!model_file.empty()) {
    const ModelFile mf = load_model(model_file);
    PipelineConfig recorded = mf.config;
    const Dataset ds = load_dataset(input, recorded);
    if (json(recorded.extraction) != json(mf.config.extraction)) {
      throw Error(ErrorCode::kInvalidArgument, input.string() + " was extracted with settings that differ from the model's");
    }
    const auto ev = evaluate_dataset(mf, ds);
    std::cout << "evaluated " << to_string(kind_of(mf.model)) << " model on " << ds.size() << " samples\n\n"
              << format_report(ev.report, ds.class_names);
    const json report{{"kind", "evaluation"},
                      {"model_kind", kind_of(mf.model)},
                      {"class_names", ds.class_names},
                      {"confusion", confusion_to_json(ev.confusion)},
                      {"report", report_to_json(ev.report, ds.class_names)},
                      {"predictions", predictions_to_json(ev.predictions, ds.class_names)}};
    emit_outputs(report, ev.confusion, ds.class_names, report_path, confusion_path);
    return 0;
  }
  PipelineConfig config = s.config;
  const Dataset ds = load_dataset(input, config);
  const auto folds = kfold(ds, s.config.folds, s.config.seed);
  const auto cv = cross_validate(ds, folds, s.config.model, model_seed(s.config.seed));
  ConfusionMatrix pooled(ds.num_classes());
  for (const auto& cm : cv.confusions) {
    for (int t = 0; t < cm.num_classes(); ++t) {
      for (int p = 0; p < cm.num_classes(); ++p) pooled(t, p) += cm(t, p);
    }
  }
  std::printf("%d-fold cross-validation of %s on %zu samples\n", s.config.folds,
              std::string(to_string(s.config.model.kind)).c_str(), ds.size());
  for (std::size_t f = 0; f < cv.reports.size(); ++f) {
    std::printf("  fold %zu: accuracy %.4f  macro-F1 %.4f\n", f, cv.reports[f].accuracy, cv.reports[f].macro_f1);
  }
  std::printf("  mean accuracy %.4f +- %.4f, macro precision %.4f, macro recall %.4f, macro F1 %.4f +- %.4f\n",
              cv.accuracy.mean, cv.accuracy.std, cv.macro_precision.mean, cv.macro_recall.mean, cv.macro_f1.mean,
              cv.macro_f1.std);
  emit_outputs(cross_validation_json(cv, s.config.model, ds.class_names, s.config.seed), pooled, ds.class_names,
               report_path, confusion_path);
  return 0;
}

int run_predict(const fs::path& model_file, const std::vector<std::string>& images, bool as_json) {
  const ModelFile mf = load_model(model_file);
  int status = 0;
  for (const auto& image : images) {
    try {
      const auto p = predict_image(mf, image);
      if (as_json) {
        std::cout << json{{"image", image}, {"class", p.class_name}, {"probabilities", p.probabilities}}.dump()
                  << '\n';
        continue;
      }
      std::cout << image << '\t' << p.class_name;
      for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "\t%s=%.6f", mf.class_names[c].c_str(), p.probabilities[c]);
        std::cout << buf;
      }
      std::cout << '\n';
    } catch (const Error& e) {
      std::cerr << "error: " << image << ": " << e.what() << '\n';
      status = kExitData;
    }
  }
  return status;
}

int run_report(const fs::path& report_file, const std::string& confusion_path) {
  json j;
  try {
    j = json::parse(read_text(report_file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, report_file.string() + ": " + e.what());
  }
  try {
    const auto names = j.at("class_names").get<std::vector<std::string>>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cross_validation") {
      std::cout << "cross-validation of " << j.at("model_kind").get<std::string>() << ", k = " << j.at("k") << "\n";
      for (const auto& f : j.at("folds")) {
        std::cout << "\nfold " << f.at("fold") << '\n' << format_report(report_from_json(f.at("report")), names);
      }
      const auto& sm = j.at("summary");
      std::printf("\nmean accuracy %.4f +- %.4f, macro F1 %.4f +- %.4f\n", sm.at("accuracy").at("mean").get<double>(),
                  sm.at("accuracy").at("std").get<double>(), sm.at("macro_f1").at("mean").get<double>(),
                  sm.at("macro_f1").at("std").get<double>());
      return 0;
    }
    const auto cm = confusion_from_json(j.at("confusion"));
    std::cout << kind << " report for " << j.at("model_kind").get<std::string>() << "\n\n"
              << format_report(report_from_json(j.at("report")), names) << "\nconfusion (rows true, columns predicted)\n"
              << confusion_csv(cm, names);
    if (!confusion_path.empty()) write_text(confusion_path, confusion_csv(cm, names));
    return 0;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, report_file.string() + ": not a wheatfx report: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wheatfx: segmentation-driven shape and texture features with ensemble classifiers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI key-value file (CLI flags take precedence)");
  CliState state;
  add_pipeline_options(app, state);

  std::string dataset_dir, out_csv, debug_dir;
  auto* extract_cmd = app.add_subcommand("extract", "Extract the fused feature vector of every image into a CSV");
  extract_cmd->add_option("dataset", dataset_dir, "Directory with one subdirectory per class")->required();
  extract_cmd->add_option("-o,--output", out_csv, "Feature CSV to write")->required();
  extract_cmd->add_option("--debug-dir", debug_dir, "Write working image, mask and Canny edges as PNGs here");

  std::string train_input, model_out, report_path, confusion_path;
  auto* train_cmd = app.add_subcommand("train", "Split 80/20, train a model and evaluate it on the held-out part");
  train_cmd->add_option("input", train_input, "Feature CSV or dataset directory")->required();
  train_cmd->add_option("-o,--output", model_out, "Model file to write")->required();
  train_cmd->add_option("--report", report_path, "Write the metrics report as JSON");
  train_cmd->add_option("--confusion-csv", confusion_path, "Write the confusion matrix as CSV");

  std::string eval_input, eval_model;
  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold cross-validation, or evaluation of a saved model");
  eval_cmd->add_option("input", eval_input, "Feature CSV or dataset directory")->required();
  eval_cmd->add_option("--model-file", eval_model, "Evaluate this saved model instead of cross-validating");
  eval_cmd->add_option("--report", report_path, "Write the metrics report as JSON");
  eval_cmd->add_option("--confusion-csv", confusion_path, "Write the (pooled) confusion matrix as CSV");

  std::string predict_model;
  std::vector<std::string> images;
  bool as_json = false;
  auto* predict_cmd = app.add_subcommand("predict", "Classify images with a saved model");
  predict_cmd->add_option("model", predict_model, "Model file")->required();
  predict_cmd->add_option("images", images, "Image files")->required();
  predict_cmd->add_flag("--json", as_json, "One JSON object per line");

  std::string report_file;
  auto* report_cmd = app.add_subcommand("report", "Render a JSON report as a table");
  report_cmd->add_option("report", report_file, "Report JSON written by train or evaluate")->required();
  report_cmd->add_option("--confusion-csv", confusion_path, "Also write the confusion matrix as CSV");

  std::string synth_dir;
  int per_class = 100;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic four-class texture dataset");
  synth_cmd->add_option("output", synth_dir, "Directory to create")->required();
  synth_cmd->add_option("--per-class", per_class, "Images per class")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    finalize(state);
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*extract_cmd) return run_extract(state, dataset_dir, out_csv, debug_dir);
    if (*train_cmd) return run_train(state, train_input, model_out, report_path, confusion_path);
    if (*eval_cmd) return run_evaluate(state, eval_input, eval_model, report_path, confusion_path);
    if (*predict_cmd) return run_predict(predict_model, images, as_json);
    if (*report_cmd) return run_report(report_file, confusion_path);
    if (*synth_cmd) {
      write_synthetic_dataset(synth_dir, per_class, state.config.seed);
      std::cout << "wrote " << per_class * 4 << " images to " << synth_dir << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
