#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/features.hpp"
#include "wheatfx/image_io.hpp"
#include "wheatfx/rng.hpp"

namespace wheatfx {

struct LabeledSample {
  FeatureVector features;
  int label = 0;
  std::string source;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Per-dimension z-score parameters. Dimensions that were constant on the
/// fitting rows keep mean 0 and std 1, so they pass through unchanged.
struct Standardization {
  std::vector<double> means;
  std::vector<double> stds;

  [[nodiscard]] double apply(std::size_t dim, double value) const { return (value - means[dim]) / stds[dim]; }

  void apply_in_place(std::span<double> row) const {
    if (row.size() != means.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "standardization expects " + std::to_string(means.size()) +
                                                     " dims, got " + std::to_string(row.size()));
    }
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = apply(d, row[d]);
  }

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct Dataset {
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names;
  std::optional<Standardization> standardization;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] int num_classes() const noexcept { return static_cast<int>(class_names.size()); }

  [[nodiscard]] std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
  }
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct IngestResult {
  Dataset dataset;
  std::vector<SkippedFile> skipped;
};

struct IngestOptions {
  ExtractionConfig extraction;
  /// Upper bound on concurrent extraction threads (>= 1).
  int workers = 1;
  /// When set, the working image, mask and Canny edges of every image are
  /// written here as PNGs.
  std::optional<std::filesystem::path> debug_dir;
};

namespace detail {

inline bool is_hidden(const std::filesystem::path& p) {
  const auto name = p.filename().string();
  return !name.empty() && name.front() == '.';
}

}  // namespace detail

/// One class per immediate subdirectory of `root`; class ids follow the
/// lexicographic order of the subdirectory names. Every regular file inside a
/// class directory is treated as an image; files that fail to decode are
/// reported in `skipped`. Samples are ordered by (class, path) regardless of
/// the number of workers.
[[nodiscard]] inline IngestResult ingest_directory(const std::filesystem::path& root, const IngestOptions& options = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::kFileNotFound, root.string() + " is not a directory");

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && !detail::is_hidden(entry.path())) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (class_dirs.size() < 2) {
    throw Error(ErrorCode::kTooFewClasses,
                root.string() + " has " + std::to_string(class_dirs.size()) + " class directories, need >= 2");
  }

  struct Job {
    fs::path path;
    int label;
  };
  std::vector<Job> jobs;
  IngestResult result;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    result.dataset.class_names.push_back(class_dirs[c].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[c])) {
      if (entry.is_regular_file() && !detail::is_hidden(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (auto& f : files) jobs.push_back({std::move(f), static_cast<int>(c)});
  }

  if (options.debug_dir) fs::create_directories(*options.debug_dir);

  struct Outcome {
    std::optional<FeatureVector> features;
    std::string error;
  };
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto extraction = extract(load_image(jobs[i].path), options.extraction);
        if (options.debug_dir) {
          const std::string stem = result.dataset.class_names[jobs[i].label] + "__" + jobs[i].path.stem().string();
          save_png(*options.debug_dir / (stem + "_gray.png"), extraction.working);
          GrayImage mask(extraction.mask.width(), extraction.mask.height());
          for (std::size_t k = 0; k < mask.size(); ++k) mask.samples()[k] = extraction.mask.bits()[k] ? 255 : 0;
          save_png(*options.debug_dir / (stem + "_mask.png"), mask);
          const auto edges = canny(extraction.working, options.extraction.canny);
          GrayImage edge_img(edges.width(), edges.height());
          for (std::size_t k = 0; k < edge_img.size(); ++k) edge_img.samples()[k] = edges.pixels.bits()[k] ? 255 : 0;
          save_png(*options.debug_dir / (stem + "_edges.png"), edge_img);
        }
        outcomes[i].features = extraction.features;
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    work();
  } else {
    const std::function<void()> task = work;
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(task);
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].features) {
      result.dataset.samples.push_back({*outcomes[i].features, jobs[i].label, jobs[i].path.generic_string()});
    } else {
      result.skipped.push_back({jobs[i].path.generic_string(), outcomes[i].error});
    }
  }
  if (result.dataset.samples.empty()) throw Error(ErrorCode::kEmptyDataset, "no readable image under " + root.string());
  return result;
}

// ---------------------------------------------------------------------------
// Feature cache CSV: header `path,label,b00..b22,t0..t4`; label holds the
// class name; numbers use the shortest representation that round-trips.

namespace csv_detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kIo, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace csv_detail

inline std::string feature_csv_header() {
  std::string header = "path,label";
  for (const auto& name : feature_column_names()) header += "," + name;
  return header;
}

inline void write_feature_csv(std::ostream& out, const Dataset& ds) {
  out << feature_csv_header() << '\n';
  for (const auto& s : ds.samples) {
    out << csv_detail::quote(s.source) << ',' << csv_detail::quote(ds.class_names.at(s.label));
    for (double v : s.features.values) out << ',' << csv_detail::format_double(v);
    out << '\n';
  }
}

inline void write_feature_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_feature_csv(out, ds);
}

/// Class ids are assigned in lexicographic order of the label names, which
/// reproduces the ids of a fresh directory ingestion.
[[nodiscard]] inline Dataset read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyDataset, "feature CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != feature_csv_header()) throw Error(ErrorCode::kIo, "unexpected feature CSV header");

  struct Row {
    std::string path;
    std::string label;
    FeatureVector features;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv_detail::split_line(line);
    if (fields.size() != 2 + kFeatureCount) {
      throw Error(ErrorCode::kIo, "line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(2 + kFeatureCount) + " fields");
    }
    Row row{std::move(fields[0]), std::move(fields[1]), {}};
    for (std::size_t d = 0; d < kFeatureCount; ++d) row.features[d] = csv_detail::parse_double(fields[2 + d], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "feature CSV has no rows");

  std::map<std::string, int> ids;
  for (const auto& r : rows) ids.emplace(r.label, 0);
  Dataset ds;
  for (auto& [name, id] : ids) {
    id = static_cast<int>(ds.class_names.size());
    ds.class_names.push_back(name);
  }
  for (auto& r : rows) ds.samples.push_back({r.features, ids.at(r.label), std::move(r.path)});
  return ds;
}

[[nodiscard]] inline Dataset read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return read_feature_csv(in);
}

// ---------------------------------------------------------------------------
// Stratified partitions.

struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

struct FoldPlan {
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t k() const noexcept { return folds.size(); }

  /// Every index outside fold `f`, ascending.
  [[nodiscard]] std::vector<std::size_t> training_indices(std::size_t f) const {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

inline std::vector<std::vector<std::size_t>> indices_by_class(std::span<const int> labels) {
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::kLabelOutOfRange, "negative label");
    max_label = std::max(max_label, l);
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  return by_class;
}

}  // namespace detail

/// Stratified shuffle split. Each class with n samples contributes
/// round(n * test_fraction) test samples, clamped to [1, n - 1]. Index lists
/// are sorted ascending.
[[nodiscard]] inline SplitPlan stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test fraction must be in (0, 1)");
  }
  const Rng rng(seed);
  SplitPlan plan;
  plan.seed = seed;
  auto by_class = detail::indices_by_class(labels);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw Error(ErrorCode::kClassTooSmall, "class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                                 " sample(s), split needs >= 2");
    }
    Rng class_rng = rng.split(c);
    class_rng.shuffle(std::span<std::size_t>(idx));
    const auto n = static_cast<double>(idx.size());
    auto n_test = static_cast<std::size_t>(std::floor(n * test_fraction + 0.5));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    plan.test.insert(plan.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    plan.train.insert(plan.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

/// Stratified k-fold. Within each shuffled class, samples are dealt to folds
/// round-robin; the starting fold carries over between classes so overall
/// fold sizes also differ by at most one.
[[nodiscard]] inline FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k-fold needs k >= 2");
  const Rng rng(seed);
  FoldPlan plan;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  auto by_class = detail::indices_by_class(labels);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kClassTooSmall, "class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                                 " sample(s), " + std::to_string(k) + "-fold needs >= k");
    }
    Rng class_rng = rng.split(c);
    class_rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i : idx) {
      plan.folds[cursor % plan.folds.size()].push_back(i);
      ++cursor;
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

[[nodiscard]] inline SplitPlan split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  const auto labels = ds.labels();
  return stratified_split(labels, test_fraction, seed);
}

[[nodiscard]] inline FoldPlan kfold(const Dataset& ds, int k, std::uint64_t seed) {
  const auto labels = ds.labels();
  return stratified_kfold(labels, k, seed);
}

/// Population mean / std over the given rows.
[[nodiscard]] inline Standardization fit_standardization(const Dataset& ds, std::span<const std::size_t> rows) {
  Standardization st;
  st.means.assign(kFeatureCount, 0.0);
  st.stds.assign(kFeatureCount, 1.0);
  if (rows.empty()) return st;
  for (std::size_t d = 0; d < kFeatureCount; ++d) {
    double lo = ds.samples[rows[0]].features[d];
    double hi = lo;
    double sum = 0.0;
    for (std::size_t r : rows) {
      const double v = ds.samples[r].features[d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (lo == hi) continue;
    const double mean = sum / static_cast<double>(rows.size());
    double sq = 0.0;
    for (std::size_t r : rows) {
      const double dv = ds.samples[r].features[d] - mean;
      sq += dv * dv;
    }
    st.means[d] = mean;
    st.stds[d] = std::sqrt(sq / static_cast<double>(rows.size()));
  }
  return st;
}

[[nodiscard]] inline Dataset apply_standardization(const Dataset& ds, const Standardization& st) {
  Dataset out = ds;
  for (auto& s : out.samples) st.apply_in_place(s.features.values);
  out.standardization = st;
  return out;
}

/// Z-scores every sample with statistics fitted on the plan's training rows
/// only.
[[nodiscard]] inline Dataset standardize(const Dataset& ds, const SplitPlan& plan) {
  return apply_standardization(ds, fit_standardization(ds, plan.train));
}

}  // namespace wheatfx
