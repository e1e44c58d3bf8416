#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "wheatfx/error.hpp"

namespace wheatfx {

/// counts[t][p]: rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : k_(num_classes), counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {}

  [[nodiscard]] int num_classes() const noexcept { return k_; }
  [[nodiscard]] std::uint64_t operator()(int t, int p) const { return counts_[static_cast<std::size_t>(t) * k_ + p]; }
  std::uint64_t& operator()(int t, int p) { return counts_[static_cast<std::size_t>(t) * k_ + p]; }

  [[nodiscard]] std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
  }
  [[nodiscard]] std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (int c = 0; c < k_; ++c) s += (*this)(c, c);
    return s;
  }
  [[nodiscard]] std::uint64_t row_sum(int t) const {
    std::uint64_t s = 0;
    for (int p = 0; p < k_; ++p) s += (*this)(t, p);
    return s;
  }
  [[nodiscard]] std::uint64_t column_sum(int p) const {
    std::uint64_t s = 0;
    for (int t = 0; t < k_; ++t) s += (*this)(t, p);
    return s;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int k_ = 0;
  std::vector<std::uint64_t> counts_;
};

[[nodiscard]] inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(y_true.size()) + " labels vs " +
                                                std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw Error(ErrorCode::kLengthMismatch, "no labels to compare");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                                                   ") with " + std::to_string(num_classes) + " classes");
    }
    ++cm(t, p);
  }
  return cm;
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  std::uint64_t predicted = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  /// Pooled over classes; equal to accuracy for single-label problems.
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  std::uint64_t total = 0;
};

/// Zero-division conventions: precision is 0 for a never-predicted class,
/// recall is 0 for a class without support, F1 is 0 when both are 0. Macro
/// means run over classes with support; the weighted means use support as
/// weight.
[[nodiscard]] inline MetricsReport report(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::kEmptyDataset, "confusion matrix is empty");
  MetricsReport r;
  r.total = total;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  const int k = cm.num_classes();
  r.per_class.resize(static_cast<std::size_t>(k));
  int counted = 0;
  std::uint64_t tp_sum = 0;
  std::uint64_t predicted_sum = 0;
  std::uint64_t support_sum = 0;
  for (int c = 0; c < k; ++c) {
    auto& m = r.per_class[c];
    const std::uint64_t tp = cm(c, c);
    m.support = cm.row_sum(c);
    m.predicted = cm.column_sum(c);
    m.precision = m.predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    tp_sum += tp;
    predicted_sum += m.predicted;
    support_sum += m.support;
    const auto w = static_cast<double>(m.support) / static_cast<double>(total);
    r.weighted_precision += w * m.precision;
    r.weighted_recall += w * m.recall;
    r.weighted_f1 += w * m.f1;
    if (m.support == 0) continue;
    ++counted;
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  if (counted > 0) {
    r.macro_precision /= counted;
    r.macro_recall /= counted;
    r.macro_f1 /= counted;
  }
  r.micro_precision = static_cast<double>(tp_sum) / static_cast<double>(predicted_sum);
  r.micro_recall = static_cast<double>(tp_sum) / static_cast<double>(support_sum);
  return r;
}

/// Plain-text classification report.
[[nodiscard]] inline std::string format_report(const MetricsReport& r, const std::vector<std::string>& class_names) {
  std::size_t width = 12;
  for (const auto& n : class_names) width = std::max(width, n.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %9s\n", static_cast<int>(width), "class", "precision", "recall",
                "f1", "support");
  out += buf;
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
    std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9llu\n", static_cast<int>(width), name.c_str(),
                  m.precision, m.recall, m.f1, static_cast<unsigned long long>(m.support));
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9llu\n", static_cast<int>(width), "macro avg",
                r.macro_precision, r.macro_recall, r.macro_f1, static_cast<unsigned long long>(r.total));
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9llu\n", static_cast<int>(width), "weighted avg",
                r.weighted_precision, r.weighted_recall, r.weighted_f1, static_cast<unsigned long long>(r.total));
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s %9.4f\n", static_cast<int>(width), "accuracy", r.accuracy);
  out += buf;
  return out;
}

[[nodiscard]] inline std::string confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  std::string out = "true\\predicted";
  for (int c = 0; c < cm.num_classes(); ++c) out += "," + class_names.at(c);
  out += '\n';
  for (int t = 0; t < cm.num_classes(); ++t) {
    out += class_names.at(t);
    for (int p = 0; p < cm.num_classes(); ++p) out += "," + std::to_string(cm(t, p));
    out += '\n';
  }
  return out;
}

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population standard deviation.
[[nodiscard]] inline MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

}  // namespace wheatfx
