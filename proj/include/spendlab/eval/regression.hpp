#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "spendlab/common/errors.hpp"

namespace spendlab {

inline double rmse(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size() || preds.empty()) throw DataError("rmse needs equal, non-empty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - labels[i]) * (preds[i] - labels[i]);
  return std::sqrt(s / static_cast<double>(preds.size()));
}

// Undefined when the labels have zero variance.
inline std::optional<double> r2_score(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size() || preds.empty()) throw DataError("r2 needs equal, non-empty inputs");
  const double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(labels.size());
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    res += (labels[i] - preds[i]) * (labels[i] - preds[i]);
    tot += (labels[i] - mean) * (labels[i] - mean);
  }
  if (tot == 0.0) return std::nullopt;
  return 1.0 - res / tot;
}

// Mann-Whitney AUC via midranks, which counts ties as one half. Undefined
// unless both classes are present.
inline std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auc needs equal-length inputs");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;  // sum of 2x midranks of positives, kept integral
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    // Ranks i+1..j share the midrank (i+1+j)/2.
    const auto twice_mid = static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[idx[t]] != 0) {
        rank_sum += twice_mid;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double twice_u = rank_sum - np * (np + 1.0);
  return twice_u / (2.0 * np * nn);
}

struct RegressionMetrics {
  std::size_t n = 0;
  std::optional<double> rmse;
  std::optional<double> r2;
  std::optional<double> auc;
};

// preds are on the label scale; scores rank rows for the AUC, whose positive
// class is spend > 0.
inline RegressionMetrics regression_metrics(std::span<const double> preds,
                                            std::span<const double> labels,
                                            std::span<const double> scores) {
  if (preds.size() != labels.size() || scores.size() != labels.size()) {
    throw DataError("regression metrics need equal-length inputs");
  }
  RegressionMetrics m;
  m.n = preds.size();
  if (m.n == 0) return m;
  m.rmse = rmse(preds, labels);
  m.r2 = r2_score(preds, labels);
  std::vector<int> bin(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) bin[i] = labels[i] > 0.0 ? 1 : 0;
  m.auc = auc(scores, bin);
  return m;
}

}  // namespace spendlab
