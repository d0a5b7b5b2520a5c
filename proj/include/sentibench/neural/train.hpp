#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sentibench/error.hpp"
#include "sentibench/linear.hpp"  // detail::sigmoid
#include "sentibench/neural/network.hpp"
#include "sentibench/neural/params.hpp"
#include "sentibench/neural/vocab.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

template <typename S>
std::vector<Mat<S>*> tensor_ptrs(NeuralParams<S>& p) {
  std::vector<Mat<S>*> out;
  for_each_tensor(p, [&out](const std::string&, Mat<S>& t, DecayKind) { out.push_back(&t); });
  return out;
}

template <typename S>
std::vector<const Mat<S>*> tensor_ptrs(const NeuralParams<S>& p) {
  std::vector<const Mat<S>*> out;
  for_each_tensor(p, [&out](const std::string&, const Mat<S>& t, DecayKind) { out.push_back(&t); });
  return out;
}

inline const std::vector<DecayKind>& tensor_decay_kinds() {
  static const std::vector<DecayKind> kinds = [] {
    HyperParams tiny;
    tiny.embed_dim = tiny.hidden_dim1 = tiny.hidden_dim2 = 1;
    NeuralParams<double> probe = zeros_like_params<double>(tiny, 2);
    std::vector<DecayKind> out;
    for_each_tensor(probe, [&out](const std::string&, Mat<double>&, DecayKind k) {
      out.push_back(k);
    });
    return out;
  }();
  return kinds;
}

template <typename S>
struct AdamState {
  NeuralParams<S> m;
  NeuralParams<S> v;
  std::uint64_t t = 0;
};

template <typename S>
AdamState<S> make_adam_state(const HyperParams& hp, std::size_t vocab_size) {
  return {zeros_like_params<S>(hp, vocab_size), zeros_like_params<S>(hp, vocab_size), 0};
}

// θ ← θ − lr·m̂/(√v̂+ε) − lr·wd·θ with β₁=0.9, β₂=0.999, ε=1e-8. The decay
// term is decoupled and uses the pre-step θ; biases and the embedding PAD
// row are never decayed.
template <typename S>
void adamw_step(NeuralParams<S>& params, const NeuralParams<S>& grads, AdamState<S>& state,
                double lr, double weight_decay) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++state.t;
  const auto t = static_cast<double>(state.t);
  const S bc1 = static_cast<S>(1.0 - std::pow(kBeta1, t));
  const S bc2 = static_cast<S>(1.0 - std::pow(kBeta2, t));

  const auto theta = tensor_ptrs(params);
  const auto g = tensor_ptrs(grads);
  const auto m = tensor_ptrs(state.m);
  const auto v = tensor_ptrs(state.v);
  const auto kinds = tensor_decay_kinds();
  const S shrink = S(1) - static_cast<S>(lr) * static_cast<S>(weight_decay);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i]->array() = S(kBeta1) * m[i]->array() + S(1.0 - kBeta1) * g[i]->array();
    v[i]->array() = S(kBeta2) * v[i]->array() + S(1.0 - kBeta2) * g[i]->array().square();
    switch (kinds[i]) {
      case DecayKind::kDecay:
        theta[i]->array() *= shrink;
        break;
      case DecayKind::kEmbedding:
        theta[i]->bottomRows(theta[i]->rows() - 1).array() *= shrink;
        break;
      case DecayKind::kNoDecay:
        break;
    }
    theta[i]->array() -=
        static_cast<S>(lr) * (m[i]->array() / bc1) / ((v[i]->array() / bc2).sqrt() + S(kEps));
  }
}

// Stops after `patience` consecutive epochs without a strict val-loss
// improvement. Epochs are 1-based.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  bool update(double val_loss, std::size_t epoch) {
    if (val_loss < best_loss_) {
      best_loss_ = val_loss;
      best_epoch_ = epoch;
      bad_epochs_ = 0;
      return false;
    }
    return ++bad_epochs_ >= patience_;
  }

  double best_loss() const { return best_loss_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  double best_loss_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t bad_epochs_ = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  NeuralParams<double> best_params;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_ran = 0;
};

struct NetworkEval {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> p1;      // class-1 probability per doc
  std::vector<int> predicted;  // argmax labels, ties to 0
};

// Eval-mode pass over docs in order. p1 = σ(logit₁ − logit₀), which is the
// two-class softmax exactly.
inline NetworkEval evaluate_network(const NeuralParams<double>& params,
                                    std::span<const EncodedDoc> docs, const HyperParams& hp) {
  if (docs.empty()) throw Error("evaluate_network: no documents");
  NetworkEval out;
  out.p1.reserve(docs.size());
  out.predicted.reserve(docs.size());
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> indices(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) indices[i] = i;
  for (std::size_t start = 0; start < docs.size(); start += hp.batch_size) {
    const std::size_t count = std::min(hp.batch_size, docs.size() - start);
    const Batch batch =
        make_batch(docs, std::span<const std::size_t>(indices).subspan(start, count));
    const ForwardCache<double> cache = forward(params, batch, hp, /*train_mode=*/false);
    loss_sum +=
        loss_label_smoothed(cache.logits, batch.labels, hp.label_smoothing) *
        static_cast<double>(count);
    for (std::size_t r = 0; r < count; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      const double diff = cache.logits(row, 1) - cache.logits(row, 0);
      const int pred = diff > 0.0 ? 1 : 0;
      out.p1.push_back(detail::sigmoid(diff));
      out.predicted.push_back(pred);
      if (pred == batch.labels[r]) ++correct;
    }
  }
  out.loss = loss_sum / static_cast<double>(docs.size());
  out.accuracy = static_cast<double>(correct) / static_cast<double>(docs.size());
  return out;
}

// Seeded mini-batch training with per-epoch validation and early stopping.
// Seed streams: derive_seed(seed, 0) initializes parameters and
// derive_seed(seed, 1) drives epoch shuffles and dropout draws, consumed in
// batch order. The parameters of the best val-loss epoch are returned.
inline TrainResult train_network(const Vocabulary& vocab, std::span<const TokenDoc> train_docs,
                                 std::span<const TokenDoc> val_docs, const HyperParams& hp,
                                 std::uint64_t seed) {
  validate_hyperparams(hp);
  if (train_docs.empty()) throw InputError("train_network: empty training set");
  if (val_docs.empty()) throw InputError("train_network: empty validation set");

  const std::vector<EncodedDoc> train_enc = encode_docs(train_docs, vocab, hp.max_len);
  const std::vector<EncodedDoc> val_enc = encode_docs(val_docs, vocab, hp.max_len);

  TrainResult result;
  NeuralParams<double> params = init_params<double>(hp, vocab.size(), derive_seed(seed, 0));
  AdamState<double> adam = make_adam_state<double>(hp, vocab.size());
  SplitMix64 rng(derive_seed(seed, 1));
  EarlyStopper stopper(hp.patience);

  std::vector<std::size_t> order(train_enc.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t count = std::min(hp.batch_size, order.size() - start);
      const Batch batch =
          make_batch(train_enc, std::span<const std::size_t>(order).subspan(start, count));
      ForwardCache<double> cache = forward(params, batch, hp, /*train_mode=*/true, &rng);
      Mat<double> dlogits;
      const double loss =
          loss_label_smoothed(cache.logits, batch.labels, hp.label_smoothing, &dlogits);
      loss_sum += loss * static_cast<double>(count);
      for (std::size_t r = 0; r < count; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        const int pred = cache.logits(row, 1) > cache.logits(row, 0) ? 1 : 0;
        if (pred == batch.labels[r]) ++correct;
      }
      const NeuralParams<double> grads = backward(params, cache, dlogits);
      adamw_step(params, grads, adam, hp.lr, hp.weight_decay);
    }

    const NetworkEval val = evaluate_network(params, val_enc, hp);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train_enc.size());
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(train_enc.size());
    stats.val_loss = val.loss;
    stats.val_acc = val.accuracy;
    result.history.push_back(stats);
    result.epochs_ran = epoch;

    const bool improved = val.loss < result.best_val_loss;
    if (improved) {
      result.best_val_loss = val.loss;
      result.best_epoch = epoch;
      result.best_params = params;
    }
    if (stopper.update(val.loss, epoch)) break;
  }
  return result;
}

}  // namespace sentibench
