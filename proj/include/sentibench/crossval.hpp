#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "sentibench/corpus.hpp"
#include "sentibench/csr.hpp"
#include "sentibench/error.hpp"
#include "sentibench/metrics.hpp"
#include "sentibench/prng.hpp"
#include "sentibench/tfidf.hpp"

namespace sentibench {

struct CvResult {
  std::vector<EvalReport> per_fold;
  EvalReport mean;
  EvalReport std_dev;  // sample standard deviation per metric
};

// k disjoint validation index sets. Per class, indices are shuffled with a
// SplitMix64 seeded generator and dealt round-robin, so per-fold class
// counts differ by at most one. Every class must have at least k members.
inline std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y,
                                                              std::size_t k,
                                                              std::uint64_t seed) {
  if (k < 2) throw InputError("stratified_kfold: k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < k) {
      throw InputError("stratified_kfold: class " + std::to_string(label) + " has only " +
                       std::to_string(idx.size()) + " samples for k=" + std::to_string(k));
    }
  }
  SplitMix64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) folds[j % k].push_back(idx[j]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

// Validation-fold predictions: a real-valued score per row (higher means
// more positive) plus the hard label.
struct ScoredPrediction {
  std::vector<double> scores;
  std::vector<int> labels;
};

// TF-IDF (+ optional MinMax) with fit/transform split, so cross-validation
// can fit on the training folds only.
class TfidfFeaturizer {
 public:
  explicit TfidfFeaturizer(TfidfConfig config = {}, bool use_minmax = true)
      : config_(config), use_minmax_(use_minmax) {}

  struct Fitted {
    TfidfModel model;
    std::optional<MinMaxScaler> scaler;

    CsrMatrix transform(std::span<const TokenDoc> docs) const {
      CsrMatrix x = tfidf_transform(model, docs);
      if (scaler) x = apply_minmax(*scaler, x);
      return x;
    }
  };

  Fitted fit(std::span<const TokenDoc> docs) const {
    Fitted f;
    f.model = tfidf_fit(docs, config_);
    if (use_minmax_) f.scaler = fit_minmax(tfidf_transform(f.model, docs));
    return f;
  }

 private:
  TfidfConfig config_;
  bool use_minmax_;
};

namespace detail {

inline EvalReport mean_report(const std::vector<EvalReport>& folds) {
  EvalReport m;
  const double k = static_cast<double>(folds.size());
  for (const auto& f : folds) {
    m.accuracy += f.accuracy / k;
    m.auc += f.auc / k;
    m.recall += f.recall / k;
    m.precision += f.precision / k;
    m.f1 += f.f1 / k;
    m.kappa += f.kappa / k;
    m.mcc += f.mcc / k;
    m.wall_time_s += f.wall_time_s / k;
    for (int c = 0; c < 2; ++c) {
      m.per_class[c].precision += f.per_class[c].precision / k;
      m.per_class[c].recall += f.per_class[c].recall / k;
      m.per_class[c].f1 += f.per_class[c].f1 / k;
      m.per_class[c].support += f.per_class[c].support;
    }
    m.confusion.tn += f.confusion.tn;  // pooled counts across folds
    m.confusion.fp += f.confusion.fp;
    m.confusion.fn += f.confusion.fn;
    m.confusion.tp += f.confusion.tp;
    m.degenerate = m.degenerate || f.degenerate;
  }
  for (int c = 0; c < 2; ++c) {
    m.per_class[c].support =
        static_cast<std::size_t>(std::llround(static_cast<double>(m.per_class[c].support) / k));
  }
  return m;
}

inline EvalReport std_report(const std::vector<EvalReport>& folds, const EvalReport& mean) {
  EvalReport s;
  if (folds.size() < 2) return s;
  const double denom = static_cast<double>(folds.size()) - 1.0;
  auto acc = [&](double EvalReport::* field) {
    double sq = 0.0;
    for (const auto& f : folds) {
      const double d = f.*field - mean.*field;
      sq += d * d;
    }
    return std::sqrt(sq / denom);
  };
  s.accuracy = acc(&EvalReport::accuracy);
  s.auc = acc(&EvalReport::auc);
  s.recall = acc(&EvalReport::recall);
  s.precision = acc(&EvalReport::precision);
  s.f1 = acc(&EvalReport::f1);
  s.kappa = acc(&EvalReport::kappa);
  s.mcc = acc(&EvalReport::mcc);
  s.wall_time_s = acc(&EvalReport::wall_time_s);
  return s;
}

}  // namespace detail

// Stratified k-fold cross-validation. For each fold the featurizer (and
// its scaler) is fitted on the k-1 training folds only, both parts are
// transformed, the trainer is invoked, and the held-out fold is scored.
// Folds may run on up to n_threads workers; results merge in fold order.
//
// Trainer signature:
//   ScoredPrediction trainer(const CsrMatrix& x_train, const std::vector<int>& y_train,
//                            const CsrMatrix& x_val);
template <typename Trainer>
CvResult cross_validate(Trainer&& trainer, const TfidfFeaturizer& featurizer,
                        std::span<const TokenDoc> docs, std::size_t k, std::uint64_t seed,
                        std::size_t n_threads = 1) {
  std::vector<int> y;
  y.reserve(docs.size());
  for (const auto& d : docs) y.push_back(d.label);
  const auto folds = stratified_kfold(y, k, seed);

  std::vector<EvalReport> reports(k);
  std::vector<std::exception_ptr> errors(k);

  auto run_fold = [&](std::size_t f) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<char> in_val(docs.size(), 0);
      for (std::size_t i : folds[f]) in_val[i] = 1;
      std::vector<TokenDoc> train_docs, val_docs;
      std::vector<int> y_train, y_val;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        if (in_val[i]) {
          val_docs.push_back(docs[i]);
          y_val.push_back(y[i]);
        } else {
          train_docs.push_back(docs[i]);
          y_train.push_back(y[i]);
        }
      }
      auto fitted = featurizer.fit(train_docs);
      CsrMatrix x_train = fitted.transform(train_docs);
      CsrMatrix x_val = fitted.transform(val_docs);
      ScoredPrediction pred = trainer(x_train, y_train, x_val);
      if (pred.scores.size() != val_docs.size() || pred.labels.size() != val_docs.size()) {
        throw Error("cross_validate: trainer returned wrong prediction count");
      }
      EvalReport r = evaluate(y_val, pred.scores, pred.labels);
      r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      reports[f] = r;
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  if (n_threads <= 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    for (std::size_t f = 0; f < k; f += n_threads) {
      pool.clear();
      for (std::size_t t = 0; t < n_threads && next < k; ++t) {
        pool.emplace_back(run_fold, next++);
      }
      for (auto& th : pool) th.join();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CvResult result;
  result.per_fold = std::move(reports);
  result.mean = detail::mean_report(result.per_fold);
  result.std_dev = detail::std_report(result.per_fold, result.mean);
  return result;
}

}  // namespace sentibench
