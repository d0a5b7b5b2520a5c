#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sentibench/error.hpp"

namespace sentibench {

struct ConfusionMatrix {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct PerClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// The full benchmark metric set. `degenerate` is set when any ratio had a
// zero denominator and was reported as 0.
struct EvalReport {
  double accuracy = 0.0;
  double auc = 0.0;
  double recall = 0.0;     // macro
  double precision = 0.0;  // macro
  double f1 = 0.0;         // macro
  double kappa = 0.0;
  double mcc = 0.0;
  double wall_time_s = 0.0;
  std::array<PerClassMetrics, 2> per_class{};
  ConfusionMatrix confusion{};
  bool degenerate = false;
};

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error("confusion: label vectors differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 0) {
      y_pred[i] == 0 ? ++cm.tn : ++cm.fp;
    } else {
      y_pred[i] == 0 ? ++cm.fn : ++cm.tp;
    }
  }
  return cm;
}

// Standard binary metrics with macro averaging. Cohen's kappa uses the
// marginal-product chance agreement; MCC is the usual four-count form.
// Zero-denominator ratios come back as 0 with the degenerate flag set.
inline EvalReport metrics_from_confusion(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error("metrics: empty confusion matrix");
  EvalReport r;
  r.confusion = cm;
  const double n = static_cast<double>(cm.total());
  const double tn = static_cast<double>(cm.tn), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tp = static_cast<double>(cm.tp);

  auto ratio = [&r](double num, double den) {
    if (den <= 0.0) {
      r.degenerate = true;
      return 0.0;
    }
    return num / den;
  };

  r.accuracy = (tn + tp) / n;
  // class 0 treats "negative" as the positive event of its own metrics
  r.per_class[0].precision = ratio(tn, tn + fn);
  r.per_class[0].recall = ratio(tn, tn + fp);
  r.per_class[0].f1 = ratio(2.0 * r.per_class[0].precision * r.per_class[0].recall,
                            r.per_class[0].precision + r.per_class[0].recall);
  r.per_class[0].support = cm.tn + cm.fp;
  r.per_class[1].precision = ratio(tp, tp + fp);
  r.per_class[1].recall = ratio(tp, tp + fn);
  r.per_class[1].f1 = ratio(2.0 * r.per_class[1].precision * r.per_class[1].recall,
                            r.per_class[1].precision + r.per_class[1].recall);
  r.per_class[1].support = cm.fn + cm.tp;

  r.precision = 0.5 * (r.per_class[0].precision + r.per_class[1].precision);
  r.recall = 0.5 * (r.per_class[0].recall + r.per_class[1].recall);
  r.f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);

  const double p_o = r.accuracy;
  const double p_e = ((tn + fn) * (tn + fp) + (fp + tp) * (fn + tp)) / (n * n);
  r.kappa = (1.0 - p_e) <= 0.0 ? (r.degenerate = true, 0.0) : (p_o - p_e) / (1.0 - p_e);

  const double mcc_den =
      std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  r.mcc = ratio(tp * tn - fp * fn, mcc_den);
  return r;
}

// Mann-Whitney AUC: (concordant + tied/2) / (n_pos * n_neg), computed from
// average ranks so ties get half credit.
inline double roc_auc(std::span<const double> scores, std::span<const int> y_true) {
  if (scores.size() != y_true.size()) throw Error("roc_auc: length mismatch");
  std::size_t n_pos = 0;
  for (int y : y_true) n_pos += (y == 1);
  const std::size_t n_neg = y_true.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error("roc_auc: undefined when only one class is present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[order[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// Convenience: full report from truth, real-valued scores and hard labels.
inline EvalReport evaluate(std::span<const int> y_true, std::span<const double> scores,
                           std::span<const int> y_pred) {
  EvalReport r = metrics_from_confusion(confusion(y_true, y_pred));
  r.auc = roc_auc(scores, y_true);
  return r;
}

}  // namespace sentibench
