#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wheatfx/config.hpp"
#include "wheatfx/dataset.hpp"
#include "wheatfx/ensemble.hpp"
#include "wheatfx/error.hpp"
#include "wheatfx/metrics.hpp"
#include "wheatfx/model.hpp"

namespace wheatfx {

using json = nlohmann::json;

inline constexpr std::string_view kModelFormatName = "wheatfx-model";
inline constexpr int kModelFormatVersion = 1;

NLOHMANN_JSON_SERIALIZE_ENUM(ModelKind, {{ModelKind::kTree, "tree"},
                                         {ModelKind::kForest, "forest"},
                                         {ModelKind::kGbm, "gbm"},
                                         {ModelKind::kVoting, "voting"},
                                         {ModelKind::kStacking, "stacking"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BaseKind, {{BaseKind::kTree, "tree"}, {BaseKind::kForest, "forest"}, {BaseKind::kGbm, "gbm"}})
NLOHMANN_JSON_SERIALIZE_ENUM(VotingMode, {{VotingMode::kHard, "hard"}, {VotingMode::kSoft, "soft"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TreeParams, max_depth, min_samples_split, min_impurity_decrease)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ForestParams, n_trees, max_features, bootstrap, tree)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GbmParams, n_rounds, learning_rate, max_depth, min_samples_split)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LogisticParams, step, iterations, l2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BaseParams, tree, forest, gbm)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ModelSpec, kind, base, ensemble_bases, voting_mode, stacking_folds, meta)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Standardization, means, stds)

inline void to_json(json& j, const ExtractionConfig& e) {
  json dirs = json::array();
  for (const auto& d : e.glcm.directions) dirs.push_back({d.dx, d.dy});
  j = json{{"canny_low", e.canny.low},
           {"canny_high", e.canny.high},
           {"canny_sigma", e.canny.sigma},
           {"seg_threshold", e.seg_threshold},
           {"glcm_distance", e.glcm.distance},
           {"glcm_levels", e.glcm.levels},
           {"glcm_directions", dirs},
           {"glcm_symmetric", e.glcm.symmetric},
           {"glcm_whole_image", e.glcm_whole_image},
           {"working_size", e.working_size}};
}

inline void from_json(const json& j, ExtractionConfig& e) {
  j.at("canny_low").get_to(e.canny.low);
  j.at("canny_high").get_to(e.canny.high);
  j.at("canny_sigma").get_to(e.canny.sigma);
  j.at("seg_threshold").get_to(e.seg_threshold);
  j.at("glcm_distance").get_to(e.glcm.distance);
  j.at("glcm_levels").get_to(e.glcm.levels);
  e.glcm.directions.clear();
  for (const auto& d : j.at("glcm_directions")) e.glcm.directions.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
  j.at("glcm_symmetric").get_to(e.glcm.symmetric);
  j.at("glcm_whole_image").get_to(e.glcm_whole_image);
  j.at("working_size").get_to(e.working_size);
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PipelineConfig, extraction, model, test_fraction, folds, seed, workers)

// --- models ---------------------------------------------------------------

inline void to_json(json& j, const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"counts", n.class_counts}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  j = json{{"num_classes", t.num_classes()}, {"num_features", t.num_features()}, {"params", t.params()},
           {"nodes", std::move(nodes)}};
}

inline void from_json(const json& j, DecisionTree& t) {
  std::vector<TreeNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    if (jn.contains("counts")) {
      jn.at("counts").get_to(n.class_counts);
      std::uint64_t total = 0;
      for (auto c : n.class_counts) total += c;
      if (total == 0) throw Error(ErrorCode::kModelFormat, "tree leaf with no samples");
      for (auto c : n.class_counts) n.probabilities.push_back(static_cast<double>(c) / static_cast<double>(total));
    } else {
      jn.at("feature").get_to(n.feature);
      jn.at("threshold").get_to(n.threshold);
      jn.at("left").get_to(n.left);
      jn.at("right").get_to(n.right);
    }
    nodes.push_back(std::move(n));
  }
  if (nodes.empty()) throw Error(ErrorCode::kModelFormat, "tree without nodes");
  const int count = static_cast<int>(nodes.size());
  const int features = j.at("num_features").get<int>();
  const auto classes = static_cast<std::size_t>(j.at("num_classes").get<int>());
  for (const auto& n : nodes) {
    if (n.is_leaf() && n.class_counts.size() != classes) {
      throw Error(ErrorCode::kModelFormat, "tree leaf class count mismatch");
    }
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count || n.feature >= features)) {
      throw Error(ErrorCode::kModelFormat, "tree node index out of range");
    }
  }
  t = DecisionTree(j.at("num_classes").get<int>(), j.at("num_features").get<int>(), j.at("params").get<TreeParams>(),
                   std::move(nodes));
}

inline void to_json(json& j, const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  j = std::move(nodes);
}

inline void from_json(const json& j, RegressionTree& t) {
  std::vector<RegressionNode> nodes;
  for (const auto& jn : j) {
    RegressionNode n;
    if (jn.contains("value")) {
      jn.at("value").get_to(n.value);
    } else {
      jn.at("feature").get_to(n.feature);
      jn.at("threshold").get_to(n.threshold);
      jn.at("left").get_to(n.left);
      jn.at("right").get_to(n.right);
    }
    nodes.push_back(n);
  }
  if (nodes.empty()) throw Error(ErrorCode::kModelFormat, "regression tree without nodes");
  t = RegressionTree(std::move(nodes));
}

inline void to_json(json& j, const RandomForest& f) {
  j = json{{"params", f.params()}, {"seed", f.seed()}, {"trees", f.trees()}};
}

inline void from_json(const json& j, RandomForest& f) {
  auto trees = j.at("trees").get<std::vector<DecisionTree>>();
  if (trees.empty()) throw Error(ErrorCode::kModelFormat, "forest without trees");
  f = RandomForest(j.at("params").get<ForestParams>(), j.at("seed").get<std::uint64_t>(), std::move(trees));
}

inline void to_json(json& j, const GradientBoosting& g) {
  j = json{{"params", g.params()},
           {"num_features", g.num_features()},
           {"initial_scores", g.initial_scores()},
           {"rounds", g.rounds()},
           {"train_loss", g.train_loss()}};
}

inline void from_json(const json& j, GradientBoosting& g) {
  const int features = j.at("num_features").get<int>();
  const std::size_t classes = j.at("initial_scores").size();
  for (const auto& round : j.at("rounds")) {
    if (round.size() != classes) throw Error(ErrorCode::kModelFormat, "boosting round has wrong tree count");
    for (const auto& tree : round) {
      const int count = static_cast<int>(tree.size());
      for (const auto& n : tree) {
        if (n.contains("value")) continue;
        const int f = n.at("feature").get<int>();
        const int l = n.at("left").get<int>();
        const int r = n.at("right").get<int>();
        if (f < 0 || f >= features || l <= 0 || r <= 0 || l >= count || r >= count) {
          throw Error(ErrorCode::kModelFormat, "boosting tree node index out of range");
        }
      }
    }
  }
  g = GradientBoosting(j.at("params").get<GbmParams>(), j.at("num_features").get<int>(),
                       j.at("initial_scores").get<std::vector<double>>(),
                       j.at("rounds").get<std::vector<std::vector<RegressionTree>>>(),
                       j.at("train_loss").get<std::vector<double>>());
}

inline void to_json(json& j, const LogisticRegression& m) {
  j = json{{"num_classes", m.num_classes()}, {"num_features", m.num_features()}, {"weights", m.weights()}};
}

inline void from_json(const json& j, LogisticRegression& m) {
  m = LogisticRegression(j.at("num_classes").get<int>(), j.at("num_features").get<int>(),
                         j.at("weights").get<std::vector<double>>());
}

inline json base_to_json(const BaseModel& b) {
  return std::visit(
      [&](const auto& m) -> json {
        return json{{"kind", static_cast<BaseKind>(b.index())}, {"model", m}};
      },
      b);
}

inline BaseModel base_from_json(const json& j) {
  switch (j.at("kind").get<BaseKind>()) {
    case BaseKind::kTree: return j.at("model").get<DecisionTree>();
    case BaseKind::kForest: return j.at("model").get<RandomForest>();
    case BaseKind::kGbm: return j.at("model").get<GradientBoosting>();
  }
  throw Error(ErrorCode::kModelFormat, "unknown base kind");
}

inline void to_json(json& j, const VotingEnsemble& v) {
  json bases = json::array();
  for (const auto& b : v.bases()) bases.push_back(base_to_json(b));
  j = json{{"mode", v.mode()}, {"bases", std::move(bases)}};
}

inline void from_json(const json& j, VotingEnsemble& v) {
  std::vector<BaseModel> bases;
  for (const auto& jb : j.at("bases")) bases.push_back(base_from_json(jb));
  v = fit_voting(std::move(bases), j.at("mode").get<VotingMode>());
}

inline void to_json(json& j, const StackingEnsemble& s) {
  json bases = json::array();
  for (const auto& b : s.bases()) bases.push_back(base_to_json(b));
  j = json{{"kinds", s.kinds()}, {"folds", s.folds()}, {"seed", s.seed()}, {"bases", std::move(bases)},
           {"meta", s.meta()}};
}

inline void from_json(const json& j, StackingEnsemble& s) {
  std::vector<BaseModel> bases;
  for (const auto& jb : j.at("bases")) bases.push_back(base_from_json(jb));
  if (bases.empty()) throw Error(ErrorCode::kModelFormat, "stacking without bases");
  s = StackingEnsemble(j.at("kinds").get<std::vector<BaseKind>>(), std::move(bases),
                       j.at("meta").get<LogisticRegression>(), j.at("folds").get<int>(),
                       j.at("seed").get<std::uint64_t>());
}

inline json model_to_json(const Model& m) {
  return std::visit([](const auto& v) { return json(v); }, m);
}

inline Model model_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::kTree: return j.get<DecisionTree>();
    case ModelKind::kForest: return j.get<RandomForest>();
    case ModelKind::kGbm: return j.get<GradientBoosting>();
    case ModelKind::kVoting: return j.get<VotingEnsemble>();
    case ModelKind::kStacking: return j.get<StackingEnsemble>();
  }
  throw Error(ErrorCode::kModelFormat, "unknown model kind");
}

/// Self-describing persisted model.
struct ModelFile {
  PipelineConfig config;
  std::vector<std::string> class_names;
  Standardization standardization;
  Model model;
};

[[nodiscard]] inline std::string dump_model(const ModelFile& f) {
  const json j{{"format", kModelFormatName},
               {"version", kModelFormatVersion},
               {"kind", kind_of(f.model)},
               {"class_names", f.class_names},
               {"config", f.config},
               {"standardization", f.standardization},
               {"model", model_to_json(f.model)}};
  return j.dump(1) + "\n";
}

[[nodiscard]] inline ModelFile parse_model(std::string_view text) {
  const std::string expected = std::string(kModelFormatName) + " format version " + std::to_string(kModelFormatVersion);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelFormat, "not a valid " + expected + " file: " + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormatName) {
      throw Error(ErrorCode::kModelFormat, "missing format tag, expected " + expected);
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kModelFormat,
                  "unsupported format version " + std::to_string(version) + ", expected " + expected);
    }
    ModelFile f;
    j.at("config").get_to(f.config);
    j.at("class_names").get_to(f.class_names);
    j.at("standardization").get_to(f.standardization);
    f.model = model_from_json(j.at("kind").get<ModelKind>(), j.at("model"));
    if (num_classes(f.model) != static_cast<int>(f.class_names.size())) {
      throw Error(ErrorCode::kModelFormat, "class names do not match the model");
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kModelFormat, "malformed " + expected + " file: " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kModelFormat) throw;
    throw Error(ErrorCode::kModelFormat, "inconsistent " + expected + " file: " + e.what());
  }
}

inline void save_model(const std::filesystem::path& path, const ModelFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << dump_model(f);
}

[[nodiscard]] inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

// --- metrics --------------------------------------------------------------

inline json report_to_json(const MetricsReport& r, const std::vector<std::string>& class_names) {
  json classes = json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    classes.push_back({{"class", class_names.at(c)},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"predicted", m.predicted}});
  }
  return json{{"accuracy", r.accuracy},
              {"total", r.total},
              {"per_class", std::move(classes)},
              {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
              {"weighted", {{"precision", r.weighted_precision}, {"recall", r.weighted_recall}, {"f1", r.weighted_f1}}},
              {"micro", {{"precision", r.micro_precision}, {"recall", r.micro_recall}}}};
}

inline MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  j.at("accuracy").get_to(r.accuracy);
  j.at("total").get_to(r.total);
  for (const auto& jc : j.at("per_class")) {
    ClassMetrics m;
    jc.at("precision").get_to(m.precision);
    jc.at("recall").get_to(m.recall);
    jc.at("f1").get_to(m.f1);
    jc.at("support").get_to(m.support);
    jc.at("predicted").get_to(m.predicted);
    r.per_class.push_back(m);
  }
  j.at("macro").at("precision").get_to(r.macro_precision);
  j.at("macro").at("recall").get_to(r.macro_recall);
  j.at("macro").at("f1").get_to(r.macro_f1);
  j.at("weighted").at("precision").get_to(r.weighted_precision);
  j.at("weighted").at("recall").get_to(r.weighted_recall);
  j.at("weighted").at("f1").get_to(r.weighted_f1);
  j.at("micro").at("precision").get_to(r.micro_precision);
  j.at("micro").at("recall").get_to(r.micro_recall);
  return r;
}

inline json confusion_to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (int t = 0; t < cm.num_classes(); ++t) {
    json row = json::array();
    for (int p = 0; p < cm.num_classes(); ++p) row.push_back(cm(t, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ConfusionMatrix confusion_from_json(const json& j) {
  ConfusionMatrix cm(static_cast<int>(j.size()));
  for (int t = 0; t < cm.num_classes(); ++t) {
    for (int p = 0; p < cm.num_classes(); ++p) cm(t, p) = j.at(t).at(p).get<std::uint64_t>();
  }
  return cm;
}

}  // namespace wheatfx
