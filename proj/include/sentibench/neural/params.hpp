#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sentibench/error.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct HyperParams {
  std::size_t embed_dim = 64;
  std::size_t hidden_dim1 = 128;
  std::size_t hidden_dim2 = 128;
  double dropout = 0.4483;
  double lr = 0.0038;
  double weight_decay = 0.00107;
  double label_smoothing = 7.8e-5;
  std::size_t batch_size = 128;
  std::size_t max_len = 128;
  std::size_t max_epochs = 10;
  std::size_t patience = 3;
};

inline void validate_hyperparams(const HyperParams& hp) {
  if (hp.embed_dim == 0 || hp.hidden_dim1 == 0 || hp.hidden_dim2 == 0) {
    throw InputError("hyperparams: dimensions must be positive");
  }
  if (hp.dropout < 0.0 || hp.dropout >= 1.0) throw InputError("hyperparams: dropout must be in [0,1)");
  if (hp.lr <= 0.0) throw InputError("hyperparams: lr must be positive");
  if (hp.weight_decay < 0.0) throw InputError("hyperparams: weight_decay must be non-negative");
  if (hp.label_smoothing < 0.0 || hp.label_smoothing >= 1.0) {
    throw InputError("hyperparams: label_smoothing must be in [0,1)");
  }
  if (hp.batch_size == 0 || hp.max_len == 0 || hp.max_epochs == 0 || hp.patience == 0) {
    throw InputError("hyperparams: batch_size, max_len, max_epochs, patience must be positive");
  }
}

inline void to_json(nlohmann::json& j, const HyperParams& hp) {
  j = nlohmann::json{{"embed_dim", hp.embed_dim},
                     {"hidden_dim1", hp.hidden_dim1},
                     {"hidden_dim2", hp.hidden_dim2},
                     {"dropout", hp.dropout},
                     {"lr", hp.lr},
                     {"weight_decay", hp.weight_decay},
                     {"label_smoothing", hp.label_smoothing},
                     {"batch_size", hp.batch_size},
                     {"max_len", hp.max_len},
                     {"max_epochs", hp.max_epochs},
                     {"patience", hp.patience}};
}

inline void from_json(const nlohmann::json& j, HyperParams& hp) {
  j.at("embed_dim").get_to(hp.embed_dim);
  j.at("hidden_dim1").get_to(hp.hidden_dim1);
  j.at("hidden_dim2").get_to(hp.hidden_dim2);
  j.at("dropout").get_to(hp.dropout);
  j.at("lr").get_to(hp.lr);
  j.at("weight_decay").get_to(hp.weight_decay);
  j.at("label_smoothing").get_to(hp.label_smoothing);
  j.at("batch_size").get_to(hp.batch_size);
  j.at("max_len").get_to(hp.max_len);
  j.at("max_epochs").get_to(hp.max_epochs);
  j.at("patience").get_to(hp.patience);
}

// One LSTM direction. Rows of the 4h×· matrices are the gate blocks in the
// order i, f, g, o. Both bias vectors enter the preactivation; the dual-bias
// convention is what the published parameter count assumes.
template <typename S>
struct LstmDirParams {
  Mat<S> w_ih;  // 4h × d_in
  Mat<S> w_hh;  // 4h × h
  Mat<S> b_ih;  // 4h × 1
  Mat<S> b_hh;  // 4h × 1
};

inline constexpr std::size_t kHeadHidden = 64;  // Linear(2h₂→64)→ReLU→Dropout→Linear(64→2)

template <typename S>
struct NeuralParams {
  Mat<S> embedding;                                    // V × embed_dim
  std::array<std::array<LstmDirParams<S>, 2>, 2> lstm;  // [layer][direction: 0 fwd, 1 bwd]
  Mat<S> attn_v;   // 2h₂ × 1
  Mat<S> attn_b;   // 1 × 1
  Mat<S> head_w1;  // 64 × 2h₂
  Mat<S> head_b1;  // 64 × 1
  Mat<S> head_w2;  // 2 × 64
  Mat<S> head_b2;  // 2 × 1
};

// Weight decay never touches biases; the embedding decays all rows except
// the PAD row, which gradients also never reach.
enum class DecayKind { kDecay, kNoDecay, kEmbedding };

// Fixed traversal order shared by initialization, the optimizer, gradient
// flattening, and the checkpoint format. f(name, tensor, decay_kind).
template <typename S, typename F>
void for_each_tensor(NeuralParams<S>& p, F&& f) {
  f("embedding", p.embedding, DecayKind::kEmbedding);
  for (int layer = 0; layer < 2; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      auto& d = p.lstm[layer][dir];
      const std::string prefix =
          "lstm" + std::to_string(layer + 1) + (dir == 0 ? ".fwd." : ".bwd.");
      f(prefix + "w_ih", d.w_ih, DecayKind::kDecay);
      f(prefix + "w_hh", d.w_hh, DecayKind::kDecay);
      f(prefix + "b_ih", d.b_ih, DecayKind::kNoDecay);
      f(prefix + "b_hh", d.b_hh, DecayKind::kNoDecay);
    }
  }
  f("attn.v", p.attn_v, DecayKind::kDecay);
  f("attn.b", p.attn_b, DecayKind::kNoDecay);
  f("head.w1", p.head_w1, DecayKind::kDecay);
  f("head.b1", p.head_b1, DecayKind::kNoDecay);
  f("head.w2", p.head_w2, DecayKind::kDecay);
  f("head.b2", p.head_b2, DecayKind::kNoDecay);
}

template <typename S, typename F>
void for_each_tensor(const NeuralParams<S>& p, F&& f) {
  for_each_tensor(const_cast<NeuralParams<S>&>(p),
                  [&f](const std::string& name, const Mat<S>& t, DecayKind kind) {
                    f(name, t, kind);
                  });
}

// V·e + Σ_layers Σ_dir [4h(d_in+h) + 8h] + (2h₂+1) + (64·2h₂+64) + (2·64+2).
// At the published dimensions (V=13,600, e=64, h₁=h₂=128) this is 1,481,155.
inline std::size_t count_params(const HyperParams& hp, std::size_t vocab_size) {
  const std::size_t e = hp.embed_dim, h1 = hp.hidden_dim1, h2 = hp.hidden_dim2;
  std::size_t total = vocab_size * e;
  auto dir_params = [](std::size_t h, std::size_t d_in) { return 4 * h * (d_in + h) + 8 * h; };
  total += 2 * dir_params(h1, e);
  total += 2 * dir_params(h2, 2 * h1);
  total += 2 * h2 + 1;
  total += kHeadHidden * 2 * h2 + kHeadHidden;
  total += 2 * kHeadHidden + 2;
  return total;
}

// All tensors allocated and zeroed; shapes derive from hp and vocab_size.
template <typename S>
NeuralParams<S> zeros_like_params(const HyperParams& hp, std::size_t vocab_size) {
  NeuralParams<S> p;
  const auto e = static_cast<Eigen::Index>(hp.embed_dim);
  const Eigen::Index h[2] = {static_cast<Eigen::Index>(hp.hidden_dim1),
                             static_cast<Eigen::Index>(hp.hidden_dim2)};
  const Eigen::Index d_in[2] = {e, 2 * h[0]};
  p.embedding = Mat<S>::Zero(static_cast<Eigen::Index>(vocab_size), e);
  for (int layer = 0; layer < 2; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      auto& d = p.lstm[layer][dir];
      d.w_ih = Mat<S>::Zero(4 * h[layer], d_in[layer]);
      d.w_hh = Mat<S>::Zero(4 * h[layer], h[layer]);
      d.b_ih = Mat<S>::Zero(4 * h[layer], 1);
      d.b_hh = Mat<S>::Zero(4 * h[layer], 1);
    }
  }
  p.attn_v = Mat<S>::Zero(2 * h[1], 1);
  p.attn_b = Mat<S>::Zero(1, 1);
  p.head_w1 = Mat<S>::Zero(static_cast<Eigen::Index>(kHeadHidden), 2 * h[1]);
  p.head_b1 = Mat<S>::Zero(static_cast<Eigen::Index>(kHeadHidden), 1);
  p.head_w2 = Mat<S>::Zero(2, static_cast<Eigen::Index>(kHeadHidden));
  p.head_b2 = Mat<S>::Zero(2, 1);
  return p;
}

namespace detail {

// Row-major uniform fill; the draw order is the tensor traversal order, so
// the same seed is bit-reproducible across runs and platforms.
template <typename S>
void fill_uniform(Mat<S>& m, SplitMix64& rng, double lo, double hi) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<S>(lo + (hi - lo) * rng.next_double());
    }
  }
}

}  // namespace detail

// Embedding ~ U(−0.1, 0.1); LSTM/attention/head weights ~ U(±1/√fan_in)
// with fan_in the input width; biases zero except the forget-gate block of
// b_ih, set to 1 so early training does not forget everything.
template <typename S>
NeuralParams<S> init_params(const HyperParams& hp, std::size_t vocab_size, std::uint64_t seed) {
  validate_hyperparams(hp);
  if (vocab_size < 2) throw InputError("init_params: vocabulary too small");
  NeuralParams<S> p = zeros_like_params<S>(hp, vocab_size);
  SplitMix64 rng(seed);
  detail::fill_uniform(p.embedding, rng, -0.1, 0.1);
  for (int layer = 0; layer < 2; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      auto& d = p.lstm[layer][dir];
      const double bound_ih = 1.0 / std::sqrt(static_cast<double>(d.w_ih.cols()));
      const double bound_hh = 1.0 / std::sqrt(static_cast<double>(d.w_hh.cols()));
      detail::fill_uniform(d.w_ih, rng, -bound_ih, bound_ih);
      detail::fill_uniform(d.w_hh, rng, -bound_hh, bound_hh);
      const Eigen::Index h = d.w_hh.cols();
      d.b_ih.block(h, 0, h, 1).setConstant(static_cast<S>(1));
    }
  }
  const double bound_ctx = 1.0 / std::sqrt(static_cast<double>(2 * hp.hidden_dim2));
  detail::fill_uniform(p.attn_v, rng, -bound_ctx, bound_ctx);
  detail::fill_uniform(p.head_w1, rng, -bound_ctx, bound_ctx);
  const double bound_head = 1.0 / std::sqrt(static_cast<double>(kHeadHidden));
  detail::fill_uniform(p.head_w2, rng, -bound_head, bound_head);
  return p;
}

template <typename To, typename From>
NeuralParams<To> cast_params(const NeuralParams<From>& p) {
  NeuralParams<To> out;
  out.embedding = p.embedding.template cast<To>();
  for (int layer = 0; layer < 2; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      out.lstm[layer][dir].w_ih = p.lstm[layer][dir].w_ih.template cast<To>();
      out.lstm[layer][dir].w_hh = p.lstm[layer][dir].w_hh.template cast<To>();
      out.lstm[layer][dir].b_ih = p.lstm[layer][dir].b_ih.template cast<To>();
      out.lstm[layer][dir].b_hh = p.lstm[layer][dir].b_hh.template cast<To>();
    }
  }
  out.attn_v = p.attn_v.template cast<To>();
  out.attn_b = p.attn_b.template cast<To>();
  out.head_w1 = p.head_w1.template cast<To>();
  out.head_b1 = p.head_b1.template cast<To>();
  out.head_w2 = p.head_w2.template cast<To>();
  out.head_b2 = p.head_b2.template cast<To>();
  return out;
}

}  // namespace sentibench
