#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sentibench/gbdt.hpp"
#include "sentibench/prng.hpp"

namespace sb = sentibench;

namespace {

sb::CsrMatrix make_csr(const std::vector<std::vector<double>>& dense) {
  const std::size_t cols = dense.empty() ? 0 : dense[0].size();
  sb::CsrMatrix x(cols);
  std::vector<std::pair<std::uint32_t, double>> row;
  for (const auto& r : dense) {
    row.clear();
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] != 0.0) row.emplace_back(static_cast<std::uint32_t>(j), r[j]);
    }
    x.append_row(row);
  }
  return x;
}

std::vector<double> leaf_values(const sb::Tree& tree) {
  std::vector<double> leaves;
  for (const auto& node : tree.nodes) {
    if (node.feature < 0) leaves.push_back(node.value);
  }
  return leaves;
}

// Eight points, one binary feature that separates the classes exactly.
struct BinaryFixture {
  std::vector<std::vector<double>> x{{0}, {0}, {0}, {0}, {1}, {1}, {1}, {1}};
  std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
};

TEST(BuildBins, QuantileEdgesOverNonzeros) {
  // Values {0,0,1,2,3,4} with three bins: the zero bin plus value bins
  // covering {1,2} and {3,4}, i.e. upper edges [2, 4].
  const auto x = make_csr({{0}, {0}, {1}, {2}, {3}, {4}});
  const auto edges = sb::build_bins(x, 3);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0], (std::vector<double>{2.0, 4.0}));
}

TEST(BuildBins, FewDistinctValuesGetExactEdges) {
  const auto x = make_csr({{0}, {5}, {5}, {9}});
  const auto edges = sb::build_bins(x, 255);
  EXPECT_EQ(edges[0], (std::vector<double>{5.0, 9.0}));
}

TEST(BuildBins, DegenerateFeatures) {
  // All-zero feature: no nonzero bins. Constant nonzero feature: one bin.
  const auto x = make_csr({{0.0, 7.0}, {0.0, 7.0}, {0.0, 7.0}});
  const auto edges = sb::build_bins(x, 255);
  EXPECT_TRUE(edges[0].empty());
  EXPECT_EQ(edges[1], std::vector<double>{7.0});
}

TEST(BuildBins, MinimumTwoBins) {
  const auto x = make_csr({{1}, {2}, {3}, {4}});
  const auto edges = sb::build_bins(x, 2);  // zero bin + one value bin
  EXPECT_EQ(edges[0], std::vector<double>{4.0});
  EXPECT_THROW(sb::build_bins(x, 1), sb::InputError);
}

TEST(GbdtTrain, HandComputedSingleTree) {
  // Balanced classes: base score = 0, so p = 0.5, g = p - y = +-0.5 and
  // h = 0.25 per point. The binary split gives G = -+2, H = 1 per side,
  // leaf value = -0.1 * G / (H + 1) = -+0.1, split gain = 2.
  const BinaryFixture fx;
  sb::GbdtConfig config;
  config.n_trees = 1;
  config.max_leaves = 2;
  const auto model = sb::gbdt_train(make_csr(fx.x), fx.y, config);

  EXPECT_DOUBLE_EQ(model.base_score, 0.0);
  ASSERT_EQ(model.trees.size(), 1u);
  auto leaves = leaf_values(model.trees[0]);
  std::sort(leaves.begin(), leaves.end());
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_NEAR(leaves[0], -0.1, 1e-9);
  EXPECT_NEAR(leaves[1], 0.1, 1e-9);

  const auto scores = sb::gbdt_decision_scores(model, make_csr(fx.x));
  for (std::size_t i = 0; i < fx.y.size(); ++i) {
    EXPECT_NEAR(scores[i], fx.y[i] == 1 ? 0.1 : -0.1, 1e-9);
    EXPECT_EQ(scores[i] > 0.0 ? 1 : 0, fx.y[i]);
  }
}

TEST(GbdtTrain, ConstantFeaturesGiveHalfProbability) {
  // Nothing to split on and a balanced prior: every probability stays 0.5.
  const auto x = make_csr({{3}, {3}, {3}, {3}});
  const std::vector<int> y = {0, 1, 0, 1};
  sb::GbdtConfig config;
  config.n_trees = 5;
  const auto model = sb::gbdt_train(x, y, config);
  for (double p : sb::gbdt_predict_proba(model, x)) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(GbdtTrain, MinChildWeightBlocksSplits) {
  // Each side of the only candidate split has H = 1 < min_child_weight, so
  // every tree stays a single leaf and all rows score alike.
  const BinaryFixture fx;
  sb::GbdtConfig config;
  config.n_trees = 3;
  config.min_child_weight = 1.5;
  const auto model = sb::gbdt_train(make_csr(fx.x), fx.y, config);
  const auto scores = sb::gbdt_decision_scores(model, make_csr(fx.x));
  for (double s : scores) EXPECT_DOUBLE_EQ(s, scores[0]);
}

TEST(GbdtTrain, TiedGainsPickLowestFeature) {
  // Two identical perfectly-splitting features: the tie must resolve to
  // feature 0.
  const std::vector<std::vector<double>> x = {{0, 0}, {0, 0}, {0, 0}, {0, 0},
                                              {1, 1}, {1, 1}, {1, 1}, {1, 1}};
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  sb::GbdtConfig config;
  config.n_trees = 1;
  config.max_leaves = 2;
  const auto model = sb::gbdt_train(make_csr(x), y, config);
  ASSERT_FALSE(model.trees[0].nodes.empty());
  EXPECT_EQ(model.trees[0].nodes[0].feature, 0);
}

std::vector<std::vector<double>> noisy_features(const std::vector<int>& y, std::uint64_t seed) {
  sb::SplitMix64 rng(seed);
  std::vector<std::vector<double>> x;
  x.reserve(y.size());
  for (int label : y) {
    const double a = rng.next_double() + 0.8 * label;
    const double b = rng.next_double() - 0.3 * label;
    x.push_back({a, b});
  }
  return x;
}

TEST(GbdtTrain, TrainingLossNonIncreasingOver100Rounds) {
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) y.push_back(i % 2);
  auto x = noisy_features(y, 31);
  // Flip some labels so the task is not separable and learning is gradual.
  sb::SplitMix64 rng(77);
  for (int i = 0; i < 30; ++i) {
    const std::size_t k = rng.next_below(y.size());
    y[k] = 1 - y[k];
  }

  const auto model = sb::gbdt_train(make_csr(x), y, {});
  ASSERT_EQ(model.round_losses.size(), 100u);
  for (std::size_t r = 1; r < model.round_losses.size(); ++r) {
    EXPECT_LE(model.round_losses[r], model.round_losses[r - 1] + 1e-12) << "round " << r;
  }
  EXPECT_LT(model.round_losses.back(), model.round_losses.front());
}

TEST(GbdtTrain, UnbalancedPriorSetsBaseScore) {
  const auto x = make_csr({{1}, {2}, {3}, {0}});
  const std::vector<int> y = {1, 1, 1, 0};
  const auto model = sb::gbdt_train(x, y, {});
  EXPECT_NEAR(model.base_score, std::log(3.0), 1e-12);
}

TEST(GbdtTrain, RejectsBadInputs) {
  const BinaryFixture fx;
  EXPECT_THROW(sb::gbdt_train(make_csr(fx.x), std::vector<int>{0, 0, 0, 0, 0, 0, 0, 0}, {}),
               sb::InputError);
  sb::GbdtConfig bad_leaves;
  bad_leaves.max_leaves = 1;
  EXPECT_THROW(sb::gbdt_train(make_csr(fx.x), fx.y, bad_leaves), sb::InputError);
  sb::GbdtConfig bad_shrink;
  bad_shrink.shrinkage = 0.0;
  EXPECT_THROW(sb::gbdt_train(make_csr(fx.x), fx.y, bad_shrink), sb::InputError);
}

TEST(GbdtPredict, ZeroTreesGivePriorProbability) {
  const BinaryFixture fx;
  sb::GbdtConfig config;
  config.n_trees = 0;
  const auto model = sb::gbdt_train(make_csr(fx.x), fx.y, config);
  EXPECT_TRUE(model.trees.empty());
  for (double p : sb::gbdt_predict_proba(model, make_csr(fx.x))) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(GbdtPredict, AllZeroLeafTreeIsIdentity) {
  const BinaryFixture fx;
  sb::GbdtConfig config;
  config.n_trees = 2;
  config.max_leaves = 2;
  auto model = sb::gbdt_train(make_csr(fx.x), fx.y, config);
  const auto before = sb::gbdt_decision_scores(model, make_csr(fx.x));

  sb::Tree zero_tree;
  zero_tree.nodes.push_back(sb::TreeNode{});  // single leaf, value 0
  model.trees.push_back(zero_tree);
  EXPECT_EQ(sb::gbdt_decision_scores(model, make_csr(fx.x)), before);
}

TEST(GbdtPredict, InvariantToRowChunking) {
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) y.push_back(i % 2);
  const auto x = make_csr(noisy_features(y, 5));
  sb::GbdtConfig config;
  config.n_trees = 20;
  const auto model = sb::gbdt_train(x, y, config);

  const auto whole = sb::gbdt_decision_scores(model, x);
  std::vector<double> chunked;
  for (std::size_t begin = 0; begin < x.rows; begin += 7) {
    const std::size_t end = std::min(x.rows, begin + 7);
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < end; ++i) idx.push_back(i);
    const auto part = sb::gbdt_decision_scores(model, x.take_rows(idx));
    chunked.insert(chunked.end(), part.begin(), part.end());
  }
  EXPECT_EQ(chunked, whole);
}

TEST(GbdtPredict, WidthMismatchRejected) {
  const BinaryFixture fx;
  const auto model = sb::gbdt_train(make_csr(fx.x), fx.y, {});
  EXPECT_THROW(sb::gbdt_decision_scores(model, make_csr({{1.0, 2.0}})), sb::Error);
}

TEST(GbdtTrain, DeterministicAcrossRuns) {
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) y.push_back(i % 2);
  const auto x = make_csr(noisy_features(y, 13));
  sb::GbdtConfig config;
  config.n_trees = 10;
  const auto a = sb::gbdt_train(x, y, config);
  const auto b = sb::gbdt_train(x, y, config);
  EXPECT_EQ(sb::gbdt_to_json(a).dump(), sb::gbdt_to_json(b).dump());
}

TEST(GbdtJson, RoundTripPreservesScores) {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(i % 2);
  const auto x = make_csr(noisy_features(y, 21));
  sb::GbdtConfig config;
  config.n_trees = 8;
  const auto model = sb::gbdt_train(x, y, config);
  const auto restored = sb::gbdt_from_json(sb::gbdt_to_json(model));
  EXPECT_EQ(sb::gbdt_decision_scores(restored, x), sb::gbdt_decision_scores(model, x));
  EXPECT_EQ(restored.base_score, model.base_score);
  EXPECT_EQ(restored.bin_edges, model.bin_edges);
}

TEST(GbdtJson, RejectsMalformedDocuments) {
  EXPECT_THROW(sb::gbdt_from_json(nlohmann::json{{"trees", nlohmann::json::array()}}),
               sb::InputError);
}

}  // namespace
