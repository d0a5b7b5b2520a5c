#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/csr.hpp"
#include "sentibench/error.hpp"
#include "sentibench/linear.hpp"

namespace sentibench {

struct GbdtConfig {
  std::size_t n_trees = 100;
  std::size_t max_leaves = 31;
  double shrinkage = 0.1;
  std::size_t max_bins = 255;
  double lambda_l2 = 1.0;
  double min_child_weight = 1e-3;
};

// feature < 0 marks a leaf carrying `value`; internal nodes route
// bin ≤ bin_threshold to `left`, the rest to `right`.
struct TreeNode {
  std::int32_t feature = -1;
  std::uint32_t bin_threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct GbdtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<std::vector<double>> bin_edges;  // per feature: inclusive upper bounds of nonzero bins
  std::vector<double> round_losses;            // training logistic loss after each round
};

// Quantile edges over the distinct nonzero values of each feature. Bin 0 is
// the implicit zero bin, so a feature gets at most max_bins−1 value bins;
// edge j is the inclusive upper bound of bin j+1.
inline std::vector<std::vector<double>> build_bins(const CsrMatrix& x, std::size_t max_bins = 255) {
  if (max_bins < 2) throw InputError("build_bins: max_bins must be at least 2");
  std::vector<std::vector<double>> values(x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto cols = x.row_cols(i);
    const auto vals = x.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) values[cols[k]].push_back(vals[k]);
  }
  std::vector<std::vector<double>> edges(x.cols);
  const std::size_t value_bins = max_bins - 1;
  for (std::size_t f = 0; f < x.cols; ++f) {
    auto& v = values[f];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.empty()) continue;
    if (v.size() <= value_bins) {
      edges[f] = v;
      continue;
    }
    edges[f].reserve(value_bins);
    for (std::size_t j = 1; j <= value_bins; ++j) {
      const std::size_t idx = j * v.size() / value_bins - 1;
      edges[f].push_back(v[idx]);
    }
    edges[f].erase(std::unique(edges[f].begin(), edges[f].end()), edges[f].end());
  }
  return edges;
}

namespace detail {

// Bin of a raw value: 0 for zero/negative, otherwise 1 + first edge holding
// it; values above the top edge clamp into the last bin.
inline std::uint32_t bin_of(const std::vector<double>& edges, double value) {
  if (value <= 0.0 || edges.empty()) return 0;
  const auto it = std::lower_bound(edges.begin(), edges.end(), value);
  if (it == edges.end()) return static_cast<std::uint32_t>(edges.size());
  return static_cast<std::uint32_t>(it - edges.begin()) + 1;
}

// CSR layout of x with values replaced by nonzero bin indices.
struct BinnedCsr {
  std::vector<std::size_t> row_offsets;
  std::vector<std::uint32_t> col_indices;
  std::vector<std::uint16_t> bins;

  std::uint32_t bin_at(std::size_t row, std::uint32_t col) const {
    const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[row]);
    const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0;
    return bins[static_cast<std::size_t>(it - col_indices.begin())];
  }
};

inline BinnedCsr bin_matrix(const CsrMatrix& x, const std::vector<std::vector<double>>& edges) {
  BinnedCsr b;
  b.row_offsets = x.row_offsets;
  b.col_indices = x.col_indices;
  b.bins.resize(x.values.size());
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    const std::uint32_t bin = bin_of(edges[x.col_indices[k]], x.values[k]);
    b.bins[k] = static_cast<std::uint16_t>(bin);
  }
  return b;
}

struct SplitInfo {
  double gain = 0.0;
  std::int32_t feature = -1;
  std::uint32_t bin = 0;  // left child takes bin ≤ this
};

struct OpenLeaf {
  std::int32_t node = -1;
  std::vector<std::uint32_t> samples;
  double g_sum = 0.0;
  double h_sum = 0.0;
  SplitInfo split;
};

}  // namespace detail

inline GbdtModel gbdt_train(const CsrMatrix& x, std::span<const int> y, GbdtConfig config = {}) {
  if (x.rows != y.size()) throw Error("gbdt_train: row/label count mismatch");
  if (config.max_leaves < 2) throw InputError("gbdt_train: max_leaves must be at least 2");
  if (config.shrinkage <= 0.0 || config.shrinkage > 1.0) {
    throw InputError("gbdt_train: shrinkage must be in (0,1]");
  }
  detail::check_binary_labels(y);

  GbdtModel model;
  model.shrinkage = config.shrinkage;
  model.bin_edges = build_bins(x, config.max_bins);
  const detail::BinnedCsr binned = detail::bin_matrix(x, model.bin_edges);

  const std::size_t n = x.rows;
  double pos = 0.0;
  for (int v : y) pos += v;
  const double clamp = std::log(1e6);
  model.base_score = std::clamp(std::log(pos / (static_cast<double>(n) - pos)), -clamp, clamp);

  // Per-feature offsets into one flat histogram buffer over nonzero bins;
  // zero-bin statistics come from subtracting the buffer from node totals.
  std::vector<std::size_t> hist_offset(x.cols + 1, 0);
  for (std::size_t f = 0; f < x.cols; ++f) {
    hist_offset[f + 1] = hist_offset[f] + model.bin_edges[f].size();
  }
  const std::size_t total_bins = hist_offset[x.cols];
  std::vector<double> hist_g(total_bins), hist_h(total_bins);

  std::vector<double> raw(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  constexpr double kGainEps = 1e-12;  // floats: "zero gain" splits must not be accepted

  // Best split of a leaf. Scanning features then bins in ascending order with
  // a strict improvement test realizes the lower-feature, lower-bin tie rule.
  auto find_split = [&](detail::OpenLeaf& leaf) {
    leaf.split = {};
    if (leaf.samples.size() < 2) return;
    std::fill(hist_g.begin(), hist_g.end(), 0.0);
    std::fill(hist_h.begin(), hist_h.end(), 0.0);
    for (std::uint32_t i : leaf.samples) {
      for (std::size_t k = binned.row_offsets[i]; k < binned.row_offsets[i + 1]; ++k) {
        const std::uint32_t f = binned.col_indices[k];
        const std::uint32_t bin = binned.bins[k];
        if (bin == 0) continue;
        const std::size_t slot = hist_offset[f] + bin - 1;
        hist_g[slot] += grad[i];
        hist_h[slot] += hess[i];
      }
    }
    const double g_total = leaf.g_sum;
    const double h_total = leaf.h_sum;
    const double lambda = config.lambda_l2;
    const double parent_term = g_total * g_total / (h_total + lambda);
    for (std::size_t f = 0; f < x.cols; ++f) {
      const std::size_t nbins = model.bin_edges[f].size();
      if (nbins == 0) continue;
      double g_nonzero = 0.0, h_nonzero = 0.0;
      for (std::size_t b = 0; b < nbins; ++b) {
        g_nonzero += hist_g[hist_offset[f] + b];
        h_nonzero += hist_h[hist_offset[f] + b];
      }
      // Left scan starts at the zero bin; the last threshold (all bins left)
      // is excluded since it yields an empty right child.
      double gl = g_total - g_nonzero;
      double hl = h_total - h_nonzero;
      for (std::size_t t = 0; t + 1 <= nbins; ++t) {
        if (t > 0) {
          gl += hist_g[hist_offset[f] + t - 1];
          hl += hist_h[hist_offset[f] + t - 1];
        }
        const double gr = g_total - gl;
        const double hr = h_total - hl;
        if (hl < config.min_child_weight || hr < config.min_child_weight) continue;
        const double gain =
            0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent_term);
        if (gain > leaf.split.gain + kGainEps) {
          leaf.split.gain = gain;
          leaf.split.feature = static_cast<std::int32_t>(f);
          leaf.split.bin = static_cast<std::uint32_t>(t);
        }
      }
    }
  };

  for (std::size_t round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(raw[i]);
      grad[i] = p - static_cast<double>(y[i]);
      hess[i] = p * (1.0 - p);
    }

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<detail::OpenLeaf> open(1);
    open[0].node = 0;
    open[0].samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) open[0].samples[i] = static_cast<std::uint32_t>(i);
    for (std::uint32_t i : open[0].samples) {
      open[0].g_sum += grad[i];
      open[0].h_sum += hess[i];
    }
    find_split(open[0]);

    std::size_t leaf_count = 1;
    while (leaf_count < config.max_leaves) {
      std::size_t best = open.size();
      for (std::size_t j = 0; j < open.size(); ++j) {
        if (open[j].split.feature < 0) continue;
        if (best == open.size() || open[j].split.gain > open[best].split.gain) best = j;
      }
      if (best == open.size()) break;

      detail::OpenLeaf leaf = std::move(open[best]);
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(best));

      detail::OpenLeaf left, right;
      for (std::uint32_t i : leaf.samples) {
        const std::uint32_t bin =
            binned.bin_at(i, static_cast<std::uint32_t>(leaf.split.feature));
        auto& child = bin <= leaf.split.bin ? left : right;
        child.samples.push_back(i);
        child.g_sum += grad[i];
        child.h_sum += hess[i];
      }
      left.node = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      right.node = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      auto& parent = tree.nodes[static_cast<std::size_t>(leaf.node)];
      parent.feature = leaf.split.feature;
      parent.bin_threshold = leaf.split.bin;
      parent.left = left.node;
      parent.right = right.node;

      find_split(left);
      find_split(right);
      open.push_back(std::move(left));
      open.push_back(std::move(right));
      ++leaf_count;
    }

    for (auto& leaf : open) {
      const double value =
          -config.shrinkage * leaf.g_sum / (leaf.h_sum + config.lambda_l2);
      tree.nodes[static_cast<std::size_t>(leaf.node)].value = value;
      for (std::uint32_t i : leaf.samples) raw[i] += value;
    }
    model.trees.push_back(std::move(tree));

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yhat = y[i] == 1 ? 1.0 : -1.0;
      loss += detail::softplus_neg(yhat * raw[i]);
    }
    model.round_losses.push_back(loss / static_cast<double>(n));
  }
  return model;
}

// base_score + Σ tree outputs, i.e. class-1 log-odds per row.
inline std::vector<double> gbdt_decision_scores(const GbdtModel& model, const CsrMatrix& x) {
  if (x.cols != model.bin_edges.size()) throw Error("gbdt: feature width mismatch");
  std::vector<double> scores(x.rows, model.base_score);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto cols = x.row_cols(i);
    const auto vals = x.row_vals(i);
    auto value_at = [&](std::uint32_t f) {
      const auto it = std::lower_bound(cols.begin(), cols.end(), f);
      if (it == cols.end() || *it != f) return 0.0;
      return vals[static_cast<std::size_t>(it - cols.begin())];
    };
    for (const Tree& tree : model.trees) {
      const TreeNode* node = &tree.nodes[0];
      while (node->feature >= 0) {
        const auto f = static_cast<std::uint32_t>(node->feature);
        const std::uint32_t bin = detail::bin_of(model.bin_edges[f], value_at(f));
        node = &tree.nodes[static_cast<std::size_t>(bin <= node->bin_threshold ? node->left
                                                                               : node->right)];
      }
      scores[i] += node->value;
    }
  }
  return scores;
}

inline std::vector<double> gbdt_predict_proba(const GbdtModel& model, const CsrMatrix& x) {
  std::vector<double> p = gbdt_decision_scores(model, x);
  for (double& v : p) v = detail::sigmoid(v);
  return p;
}

inline nlohmann::json gbdt_to_json(const GbdtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      if (node.feature < 0) {
        nodes.push_back({{"value", node.value}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"bin", node.bin_threshold},
                         {"left", node.left},
                         {"right", node.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return nlohmann::json{
      {"format_version", 1},
      {"base_score", model.base_score},
      {"shrinkage", model.shrinkage},
      {"bin_edges", model.bin_edges},
      {"trees", std::move(trees)},
  };
}

inline GbdtModel gbdt_from_json(const nlohmann::json& j) {
  if (!j.contains("trees") || !j.contains("bin_edges")) {
    throw InputError("gbdt model JSON missing required fields");
  }
  GbdtModel model;
  model.base_score = j.at("base_score").get<double>();
  model.shrinkage = j.at("shrinkage").get<double>();
  model.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
  for (const auto& jt : j.at("trees")) {
    Tree tree;
    for (const auto& jn : jt.at("nodes")) {
      TreeNode node;
      if (jn.contains("value")) {
        node.value = jn.at("value").get<double>();
      } else {
        node.feature = jn.at("feature").get<std::int32_t>();
        node.bin_threshold = jn.at("bin").get<std::uint32_t>();
        node.left = jn.at("left").get<std::int32_t>();
        node.right = jn.at("right").get<std::int32_t>();
      }
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace sentibench
