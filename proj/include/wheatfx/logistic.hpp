#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wheatfx/error.hpp"
#include "wheatfx/gbm.hpp"
#include "wheatfx/tree.hpp"

namespace wheatfx {

struct LogisticParams {
  double step = 0.1;
  int iterations = 2000;
  double l2 = 1e-4;

  friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

/// Multinomial logistic regression. Weights are K rows of (D + 1) entries;
/// the last entry of each row is the unpenalized bias.
class LogisticRegression {
 public:
  LogisticRegression() = default;
  LogisticRegression(int num_classes, int num_features, std::vector<double> weights)
      : k_(num_classes), d_(num_features), w_(std::move(weights)) {
    if (w_.size() != static_cast<std::size_t>(k_) * (d_ + 1)) {
      throw Error(ErrorCode::kDimensionMismatch, "logistic weights must be K x (D + 1)");
    }
  }

  [[nodiscard]] int num_classes() const noexcept { return k_; }
  [[nodiscard]] int num_features() const noexcept { return d_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return w_; }

  [[nodiscard]] std::vector<double> predict_proba(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(d_)) {
      throw Error(ErrorCode::kDimensionMismatch, "meta-learner expects " + std::to_string(d_) + " features, got " +
                                                     std::to_string(x.size()));
    }
    return softmax(linear_scores(w_, x, k_, d_));
  }

  static std::vector<double> linear_scores(std::span<const double> w, std::span<const double> x, int k, int d) {
    std::vector<double> s(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      const double* row = w.data() + static_cast<std::size_t>(c) * (d + 1);
      double acc = row[d];
      for (int j = 0; j < d; ++j) acc += row[j] * x[j];
      s[c] = acc;
    }
    return s;
  }

  friend bool operator==(const LogisticRegression&, const LogisticRegression&) = default;

 private:
  int k_ = 0;
  int d_ = 0;
  std::vector<double> w_;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2 over non-bias weights, and its
/// gradient with respect to `w` (same layout as the weights).
inline double logistic_loss(std::span<const double> w, const FeatureMatrix& x, std::span<const int> y,
                            int num_classes, double l2, std::vector<double>* gradient = nullptr) {
  const int k = num_classes;
  const int d = static_cast<int>(x.cols());
  const auto n = static_cast<double>(x.rows());
  const std::size_t stride = static_cast<std::size_t>(d) + 1;
  if (gradient != nullptr) gradient->assign(w.size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const auto s = LogisticRegression::linear_scores(w, row, k, d);
    const double top = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - top);
    loss += top + std::log(sum) - s[y[i]];
    if (gradient == nullptr) continue;
    for (int c = 0; c < k; ++c) {
      const double delta = std::exp(s[c] - top) / sum - (y[i] == c ? 1.0 : 0.0);
      double* g = gradient->data() + static_cast<std::size_t>(c) * stride;
      for (int j = 0; j < d; ++j) g[j] += delta * row[j];
      g[d] += delta;
    }
  }
  loss /= n;
  double penalty = 0.0;
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) {
      const double v = w[static_cast<std::size_t>(c) * stride + j];
      penalty += v * v;
    }
  }
  loss += 0.5 * l2 * penalty;
  if (gradient != nullptr) {
    for (int c = 0; c < k; ++c) {
      for (int j = 0; j <= d; ++j) {
        auto& g = (*gradient)[static_cast<std::size_t>(c) * stride + j];
        g /= n;
        if (j < d) g += l2 * w[static_cast<std::size_t>(c) * stride + j];
      }
    }
  }
  return loss;
}

/// Full-batch gradient descent from zero weights. `loss_history`, when given,
/// receives the objective before every step and after the last one.
[[nodiscard]] inline LogisticRegression fit_logistic(const FeatureMatrix& x, std::span<const int> y, int num_classes,
                                                     const LogisticParams& params = {},
                                                     std::vector<double>* loss_history = nullptr) {
  detail::check_training_set(x, y, num_classes);
  if (!(params.step > 0.0) || params.iterations < 0 || params.l2 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid logistic regression parameters");
  }
  const int d = static_cast<int>(x.cols());
  std::vector<double> w(static_cast<std::size_t>(num_classes) * (d + 1), 0.0);
  std::vector<double> grad;
  if (loss_history != nullptr) loss_history->clear();
  for (int it = 0; it < params.iterations; ++it) {
    const double loss = logistic_loss(w, x, y, num_classes, params.l2, &grad);
    if (loss_history != nullptr) loss_history->push_back(loss);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= params.step * grad[i];
  }
  if (loss_history != nullptr) loss_history->push_back(logistic_loss(w, x, y, num_classes, params.l2));
  return LogisticRegression(num_classes, d, std::move(w));
}

}  // namespace wheatfx
