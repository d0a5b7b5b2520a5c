#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sentibench/error.hpp"
#include "sentibench/neural/params.hpp"
#include "sentibench/neural/vocab.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

struct EncodedDoc {
  std::vector<std::int32_t> ids;
  std::size_t length = 0;
  int label = 0;
};

inline std::vector<EncodedDoc> encode_docs(std::span<const TokenDoc> docs, const Vocabulary& vocab,
                                           std::size_t max_len) {
  std::vector<EncodedDoc> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    auto [ids, length] = encode(doc, vocab, max_len);
    out.push_back({std::move(ids), length, doc.label});
  }
  return out;
}

// PAD-padded B×T id matrix (row-major). T is the longest row in the batch;
// PAD positions are masked out of every computation, so trimming to the
// batch maximum changes nothing but cost.
struct Batch {
  std::size_t b = 0;
  std::size_t t = 0;
  std::vector<std::int32_t> token_ids;
  std::vector<std::size_t> lengths;
  std::vector<int> labels;
};

inline Batch make_batch(std::span<const EncodedDoc> docs, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error("make_batch: empty batch");
  Batch batch;
  batch.b = indices.size();
  for (std::size_t i : indices) batch.t = std::max(batch.t, docs[i].length);
  batch.token_ids.assign(batch.b * batch.t, Vocabulary::kPad);
  batch.lengths.reserve(batch.b);
  batch.labels.reserve(batch.b);
  for (std::size_t row = 0; row < batch.b; ++row) {
    const EncodedDoc& doc = docs[indices[row]];
    std::copy(doc.ids.begin(), doc.ids.end(), batch.token_ids.begin() + row * batch.t);
    batch.lengths.push_back(doc.length);
    batch.labels.push_back(doc.label);
  }
  return batch;
}

namespace detail {

template <typename S>
Mat<S> sigmoid_mat(const Mat<S>& x) {
  return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

// Per-timestep activations of one direction. c and h hold the post-mask
// carried values; tanh_c is tanh of the pre-mask candidate cell.
template <typename S>
struct LstmDirCache {
  std::vector<Mat<S>> i, f, g, o, tanh_c, c, h;

  void resize(std::size_t t) {
    i.resize(t); f.resize(t); g.resize(t); o.resize(t);
    tanh_c.resize(t); c.resize(t); h.resize(t);
  }
};

// Padding uses compute-then-mask carry: the new state is computed, then
// PAD positions keep the previous state. The forward direction therefore
// freezes after a sequence ends and the backward direction stays zero
// until it begins, which makes logits invariant to appended padding.
template <typename S>
void lstm_dir_forward(const LstmDirParams<S>& p, const std::vector<Mat<S>>& xs, const Mat<S>& mask,
                      int dir, LstmDirCache<S>& cache) {
  const std::size_t t_len = xs.size();
  const Eigen::Index b = xs[0].rows();
  const Eigen::Index h = p.w_hh.cols();
  cache.resize(t_len);
  const Mat<S> bias = p.b_ih + p.b_hh;
  Mat<S> h_prev = Mat<S>::Zero(b, h);
  Mat<S> c_prev = Mat<S>::Zero(b, h);
  for (std::size_t k = 0; k < t_len; ++k) {
    const std::size_t t = dir == 0 ? k : t_len - 1 - k;
    Mat<S> a = xs[t] * p.w_ih.transpose();
    a.noalias() += h_prev * p.w_hh.transpose();
    a.rowwise() += bias.col(0).transpose();
    Mat<S> gi = sigmoid_mat<S>(a.middleCols(0, h));
    Mat<S> gf = sigmoid_mat<S>(a.middleCols(h, h));
    Mat<S> gg = a.middleCols(2 * h, h).array().tanh().matrix();
    Mat<S> go = sigmoid_mat<S>(a.middleCols(3 * h, h));
    Mat<S> c_new = (gf.array() * c_prev.array() + gi.array() * gg.array()).matrix();
    Mat<S> tc = c_new.array().tanh().matrix();
    Mat<S> h_new = (go.array() * tc.array()).matrix();
    const auto m = mask.col(static_cast<Eigen::Index>(t)).array();
    cache.h[t] = (h_new.array().colwise() * m + h_prev.array().colwise() * (S(1) - m)).matrix();
    cache.c[t] = (c_new.array().colwise() * m + c_prev.array().colwise() * (S(1) - m)).matrix();
    cache.i[t] = std::move(gi);
    cache.f[t] = std::move(gf);
    cache.g[t] = std::move(gg);
    cache.o[t] = std::move(go);
    cache.tanh_c[t] = std::move(tc);
    h_prev = cache.h[t];
    c_prev = cache.c[t];
  }
}

template <typename S>
void lstm_dir_backward(const LstmDirParams<S>& p, const LstmDirCache<S>& cache,
                       const std::vector<Mat<S>>& xs, const std::vector<Mat<S>>& dh_ext,
                       const Mat<S>& mask, int dir, LstmDirParams<S>& grads,
                       std::vector<Mat<S>>& dx) {
  const std::size_t t_len = xs.size();
  const Eigen::Index b = xs[0].rows();
  const Eigen::Index h = p.w_hh.cols();
  Mat<S> dh_carry = Mat<S>::Zero(b, h);
  Mat<S> dc_carry = Mat<S>::Zero(b, h);
  Mat<S> da(b, 4 * h);
  for (std::size_t k = t_len; k-- > 0;) {
    const std::size_t t = dir == 0 ? k : t_len - 1 - k;
    const bool has_prev = k > 0;
    const std::size_t prev_t = dir == 0 ? t - 1 : t + 1;
    const auto m = mask.col(static_cast<Eigen::Index>(t)).array();

    const Mat<S> dh_total = dh_ext[t] + dh_carry;
    Mat<S> dh_new = (dh_total.array().colwise() * m).matrix();
    Mat<S> dh_keep = (dh_total.array().colwise() * (S(1) - m)).matrix();
    Mat<S> dc_new = (dc_carry.array().colwise() * m).matrix();
    Mat<S> dc_keep = (dc_carry.array().colwise() * (S(1) - m)).matrix();

    const Mat<S>& gi = cache.i[t];
    const Mat<S>& gf = cache.f[t];
    const Mat<S>& gg = cache.g[t];
    const Mat<S>& go = cache.o[t];
    const Mat<S>& tc = cache.tanh_c[t];

    Mat<S> do_ = (dh_new.array() * tc.array()).matrix();
    dc_new.array() += dh_new.array() * go.array() * (S(1) - tc.array().square());

    Mat<S> df;
    if (has_prev) {
      df = (dc_new.array() * cache.c[prev_t].array()).matrix();
    } else {
      df = Mat<S>::Zero(b, h);  // c_prev = 0 at the first step
    }
    Mat<S> di = (dc_new.array() * gg.array()).matrix();
    Mat<S> dg = (dc_new.array() * gi.array()).matrix();
    Mat<S> dc_cell = (dc_new.array() * gf.array()).matrix();

    da.middleCols(0, h) = (di.array() * gi.array() * (S(1) - gi.array())).matrix();
    da.middleCols(h, h) = (df.array() * gf.array() * (S(1) - gf.array())).matrix();
    da.middleCols(2 * h, h) = (dg.array() * (S(1) - gg.array().square())).matrix();
    da.middleCols(3 * h, h) = (do_.array() * go.array() * (S(1) - go.array())).matrix();

    grads.w_ih.noalias() += da.transpose() * xs[t];
    if (has_prev) grads.w_hh.noalias() += da.transpose() * cache.h[prev_t];
    grads.b_ih.col(0) += da.colwise().sum().transpose();
    grads.b_hh.col(0) += da.colwise().sum().transpose();
    dx[t].noalias() += da * p.w_ih;
    dh_carry = dh_keep;
    if (has_prev) dh_carry.noalias() += da * p.w_hh;
    dc_carry = dc_keep + dc_cell;
  }
}

}  // namespace detail

template <typename S>
struct ForwardCache {
  Batch batch;
  bool train_mode = false;
  Mat<S> mask;             // B×T, 1 at real positions
  std::vector<Mat<S>> x;   // embedded input per timestep, B×e
  std::array<std::array<detail::LstmDirCache<S>, 2>, 2> lstm;
  std::vector<Mat<S>> h1;  // layer-1 output per timestep, B×2h₁
  std::vector<Mat<S>> h2;  // layer-2 output per timestep, B×2h₂
  Mat<S> alpha;            // B×T attention weights, PAD exactly 0
  Mat<S> context;          // B×2h₂
  Mat<S> z1, a1;           // head pre/post ReLU, B×64
  Mat<S> drop_scale;       // multiplicative dropout factors, B×64
  Mat<S> logits;           // B×2
};

// Embedding → BiLSTM ×2 → additive scalar attention (PAD masked to −∞
// before the softmax) → Linear→ReLU→Dropout→Linear. Dropout draws happen
// in train mode only, row-major, and use inverted scaling so eval applies
// no correction. dropout_rng may be null when dropout is 0 or mode is eval.
template <typename S>
ForwardCache<S> forward(const NeuralParams<S>& params, const Batch& batch, const HyperParams& hp,
                        bool train_mode, SplitMix64* dropout_rng = nullptr) {
  const auto b = static_cast<Eigen::Index>(batch.b);
  const auto t_len = batch.t;
  const auto v = params.embedding.rows();
  if (batch.b == 0 || t_len == 0) throw Error("forward: empty batch");
  for (std::size_t row = 0; row < batch.b; ++row) {
    if (batch.lengths[row] == 0 || batch.lengths[row] > t_len) {
      throw Error("forward: batch length out of range");
    }
  }
  for (std::int32_t id : batch.token_ids) {
    if (id < 0 || id >= v) throw Error("forward: token id out of vocabulary range");
  }

  ForwardCache<S> cache;
  cache.batch = batch;
  cache.train_mode = train_mode;
  cache.mask = Mat<S>::Zero(b, static_cast<Eigen::Index>(t_len));
  for (std::size_t row = 0; row < batch.b; ++row) {
    for (std::size_t t = 0; t < batch.lengths[row]; ++t) {
      cache.mask(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(t)) = S(1);
    }
  }

  cache.x.resize(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    cache.x[t].resize(b, params.embedding.cols());
    for (std::size_t row = 0; row < batch.b; ++row) {
      cache.x[t].row(static_cast<Eigen::Index>(row)) =
          params.embedding.row(batch.token_ids[row * t_len + t]);
    }
  }

  const std::vector<Mat<S>>* layer_in = &cache.x;
  for (int layer = 0; layer < 2; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      detail::lstm_dir_forward(params.lstm[layer][dir], *layer_in, cache.mask, dir,
                               cache.lstm[layer][dir]);
    }
    auto& concat = layer == 0 ? cache.h1 : cache.h2;
    concat.resize(t_len);
    const Eigen::Index h = params.lstm[layer][0].w_hh.cols();
    for (std::size_t t = 0; t < t_len; ++t) {
      concat[t].resize(b, 2 * h);
      concat[t].leftCols(h) = cache.lstm[layer][0].h[t];
      concat[t].rightCols(h) = cache.lstm[layer][1].h[t];
    }
    layer_in = &concat;
  }

  Mat<S> scores(b, static_cast<Eigen::Index>(t_len));
  for (std::size_t t = 0; t < t_len; ++t) {
    scores.col(static_cast<Eigen::Index>(t)) =
        (cache.h2[t] * params.attn_v).array() + params.attn_b(0, 0);
  }
  cache.alpha = Mat<S>::Zero(b, static_cast<Eigen::Index>(t_len));
  for (std::size_t row = 0; row < batch.b; ++row) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto len = static_cast<Eigen::Index>(batch.lengths[row]);
    const S mx = scores.row(r).head(len).maxCoeff();
    S sum = S(0);
    for (Eigen::Index t = 0; t < len; ++t) {
      const S e = std::exp(scores(r, t) - mx);
      cache.alpha(r, t) = e;
      sum += e;
    }
    cache.alpha.row(r).head(len) /= sum;
  }

  const Eigen::Index ctx_dim = params.attn_v.rows();
  cache.context = Mat<S>::Zero(b, ctx_dim);
  for (std::size_t t = 0; t < t_len; ++t) {
    cache.context.array() +=
        cache.h2[t].array().colwise() * cache.alpha.col(static_cast<Eigen::Index>(t)).array();
  }

  cache.z1 = cache.context * params.head_w1.transpose();
  cache.z1.rowwise() += params.head_b1.col(0).transpose();
  cache.a1 = cache.z1.cwiseMax(S(0));
  const auto head = static_cast<Eigen::Index>(kHeadHidden);
  if (train_mode && hp.dropout > 0.0) {
    if (dropout_rng == nullptr) throw Error("forward: dropout requires an rng in train mode");
    cache.drop_scale.resize(b, head);
    const S keep_scale = S(1) / S(1.0 - hp.dropout);
    for (Eigen::Index r = 0; r < b; ++r) {
      for (Eigen::Index c = 0; c < head; ++c) {
        cache.drop_scale(r, c) = dropout_rng->next_double() >= hp.dropout ? keep_scale : S(0);
      }
    }
  } else {
    cache.drop_scale = Mat<S>::Ones(b, head);
  }
  const Mat<S> dropped = cache.a1.cwiseProduct(cache.drop_scale);
  cache.logits = dropped * params.head_w2.transpose();
  cache.logits.rowwise() += params.head_b2.col(0).transpose();
  return cache;
}

// Mean cross-entropy against (1−ε)·onehot + ε/2, via a stable log-sum-exp.
// If dlogits is given it receives d(loss)/d(logits), already divided by B.
template <typename S>
S loss_label_smoothed(const Mat<S>& logits, std::span<const int> labels, double epsilon,
                      Mat<S>* dlogits = nullptr) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || logits.cols() != 2) {
    throw Error("loss: logits/labels shape mismatch");
  }
  if (epsilon < 0.0 || epsilon >= 1.0) throw Error("loss: epsilon must be in [0,1)");
  const Eigen::Index b = logits.rows();
  if (dlogits != nullptr) dlogits->resize(b, 2);
  S total = S(0);
  const S eps = static_cast<S>(epsilon);
  for (Eigen::Index r = 0; r < b; ++r) {
    const S l0 = logits(r, 0), l1 = logits(r, 1);
    const S mx = std::max(l0, l1);
    const S e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
    const S lse = mx + std::log(e0 + e1);
    const S t1 = labels[r] == 1 ? S(1) - eps / S(2) : eps / S(2);
    const S t0 = S(1) - t1;
    total += lse - t0 * l0 - t1 * l1;
    if (dlogits != nullptr) {
      const S p1 = e1 / (e0 + e1);
      (*dlogits)(r, 0) = ((S(1) - p1) - t0) / S(b);
      (*dlogits)(r, 1) = (p1 - t1) / S(b);
    }
  }
  return total / S(b);
}

// Exact reverse-mode gradients for every parameter, including through the
// attention softmax, both BiLSTM layers, and the touched embedding rows.
template <typename S>
NeuralParams<S> backward(const NeuralParams<S>& params, const ForwardCache<S>& cache,
                         const Mat<S>& dlogits) {
  NeuralParams<S> grads = params;
  for_each_tensor(grads, [](const std::string&, Mat<S>& t, DecayKind) { t.setZero(); });

  const Batch& batch = cache.batch;
  const auto b = static_cast<Eigen::Index>(batch.b);
  const std::size_t t_len = batch.t;

  const Mat<S> dropped = cache.a1.cwiseProduct(cache.drop_scale);
  grads.head_w2.noalias() += dlogits.transpose() * dropped;
  grads.head_b2.col(0) += dlogits.colwise().sum().transpose();
  Mat<S> dy = dlogits * params.head_w2;
  Mat<S> dz1 = (dy.array() * cache.drop_scale.array() *
                (cache.z1.array() > S(0)).template cast<S>())
                   .matrix();
  grads.head_w1.noalias() += dz1.transpose() * cache.context;
  grads.head_b1.col(0) += dz1.colwise().sum().transpose();
  Mat<S> dctx = dz1 * params.head_w1;

  Mat<S> dalpha(b, static_cast<Eigen::Index>(t_len));
  for (std::size_t t = 0; t < t_len; ++t) {
    dalpha.col(static_cast<Eigen::Index>(t)) =
        (dctx.array() * cache.h2[t].array()).rowwise().sum();
  }
  const Mat<S> s_row = (cache.alpha.array() * dalpha.array()).rowwise().sum();
  const Mat<S> de =
      (cache.alpha.array() * (dalpha.array().colwise() - s_row.col(0).array())).matrix();
  grads.attn_b(0, 0) += de.sum();

  std::vector<Mat<S>> dh2(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    const auto tc = static_cast<Eigen::Index>(t);
    grads.attn_v.noalias() += cache.h2[t].transpose() * de.col(tc);
    dh2[t] = (dctx.array().colwise() * cache.alpha.col(tc).array()).matrix();
    dh2[t].noalias() += de.col(tc) * params.attn_v.transpose();
  }

  std::vector<Mat<S>> dh1(t_len);
  const Eigen::Index h1_dim = params.lstm[0][0].w_hh.cols();
  for (std::size_t t = 0; t < t_len; ++t) dh1[t] = Mat<S>::Zero(b, 2 * h1_dim);
  {
    const Eigen::Index h = params.lstm[1][0].w_hh.cols();
    std::vector<Mat<S>> dh_ext(t_len);
    for (int dir = 0; dir < 2; ++dir) {
      for (std::size_t t = 0; t < t_len; ++t) {
        dh_ext[t] = dh2[t].middleCols(dir == 0 ? 0 : h, h);
      }
      detail::lstm_dir_backward(params.lstm[1][dir], cache.lstm[1][dir], cache.h1, dh_ext,
                                cache.mask, dir, grads.lstm[1][dir], dh1);
    }
  }

  std::vector<Mat<S>> dx(t_len);
  for (std::size_t t = 0; t < t_len; ++t) dx[t] = Mat<S>::Zero(b, params.embedding.cols());
  {
    const Eigen::Index h = params.lstm[0][0].w_hh.cols();
    std::vector<Mat<S>> dh_ext(t_len);
    for (int dir = 0; dir < 2; ++dir) {
      for (std::size_t t = 0; t < t_len; ++t) {
        dh_ext[t] = dh1[t].middleCols(dir == 0 ? 0 : h, h);
      }
      detail::lstm_dir_backward(params.lstm[0][dir], cache.lstm[0][dir], cache.x, dh_ext,
                                cache.mask, dir, grads.lstm[0][dir], dx);
    }
  }

  // Masked positions carry exactly-zero dx, so PAD rows accumulate nothing.
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t row = 0; row < batch.b; ++row) {
      grads.embedding.row(batch.token_ids[row * t_len + t]) +=
          dx[t].row(static_cast<Eigen::Index>(row));
    }
  }
  return grads;
}

}  // namespace sentibench
