#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "sentibench/linear.hpp"

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

// Objectives recomputed from dense data, independent of the library code.
double lr_objective_dense(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const std::vector<double>& w, double b, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
    const double m = (y[i] == 1 ? 1.0 : -1.0) * s;
    loss += m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return loss / static_cast<double>(x.size()) + 0.5 * lambda * penalty;
}

double svm_objective_dense(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           const std::vector<double>& w, double b, double lambda) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[i][j];
    hinge += std::max(0.0, 1.0 - (y[i] == 1 ? 1.0 : -1.0) * s);
  }
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return 0.5 * lambda * penalty + hinge / static_cast<double>(x.size());
}

// Exhaustive lattice search with iterative box refinement around the argmin.
// Slow but simple: the reference answer for the solver-quality checks.
double grid_minimize(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> lo, std::vector<double> hi, std::size_t points,
                     int rounds) {
  const std::size_t dims = lo.size();
  std::vector<double> best(dims, 0.0);
  double best_f = std::numeric_limits<double>::infinity();
  for (int round = 0; round < rounds; ++round) {
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> point(dims);
    while (true) {
      for (std::size_t d = 0; d < dims; ++d) {
        point[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx[d]) /
                               static_cast<double>(points - 1);
      }
      const double v = f(point);
      if (v < best_f) {
        best_f = v;
        best = point;
      }
      std::size_t d = 0;
      while (d < dims && ++idx[d] == points) idx[d++] = 0;
      if (d == dims) break;
    }
    for (std::size_t d = 0; d < dims; ++d) {
      const double half = 2.0 * (hi[d] - lo[d]) / static_cast<double>(points - 1);
      lo[d] = best[d] - half;
      hi[d] = best[d] + half;
    }
  }
  return best_f;
}

struct Fixture1d {
  std::vector<std::vector<double>> x{{-2.0}, {-1.0}, {1.0}, {2.0}};
  std::vector<int> y{0, 0, 1, 1};
};

struct Fixture2d {
  std::vector<std::vector<double>> x{{0.0, 1.5}, {-1.0, 0.5}, {-2.0, -0.5},
                                     {1.0, -1.0}, {2.0, 0.5}, {0.5, -1.5}};
  std::vector<int> y{1, 1, 0, 0, 1, 0};
};

TEST(LrTrain, MatchesGridOracle1d) {
  const Fixture1d fx;
  const double lambda = 0.1;
  const auto model = sb::lr_train(make_csr(fx.x), fx.y, lambda);

  const double oracle = grid_minimize(
      [&](const std::vector<double>& p) {
        return lr_objective_dense(fx.x, fx.y, {p[0]}, p[1], lambda);
      },
      {-10.0, -10.0}, {10.0, 10.0}, 41, 8);

  EXPECT_NEAR(model.solver_report.final_objective, oracle, 1e-4);
  // The reported objective is the true objective at the returned weights.
  EXPECT_NEAR(model.solver_report.final_objective,
              lr_objective_dense(fx.x, fx.y, model.weights, model.bias, lambda), 1e-12);
}

TEST(LrTrain, MatchesGridOracle2d) {
  const Fixture2d fx;
  const double lambda = 0.25;
  const auto model = sb::lr_train(make_csr(fx.x), fx.y, lambda);

  const double oracle = grid_minimize(
      [&](const std::vector<double>& p) {
        return lr_objective_dense(fx.x, fx.y, {p[0], p[1]}, p[2], lambda);
      },
      {-8.0, -8.0, -8.0}, {8.0, 8.0, 8.0}, 33, 8);

  EXPECT_NEAR(model.solver_report.final_objective, oracle, 1e-4);
  EXPECT_TRUE(model.solver_report.converged);
}

TEST(LrTrain, SymmetricDataGivesZeroBias) {
  // The fixture is invariant under (x, y) -> (-x, 1-y), so the optimum has
  // b = 0 and the solver must find it.
  const Fixture1d fx;
  const auto model = sb::lr_train(make_csr(fx.x), fx.y, 0.1);
  EXPECT_NEAR(model.bias, 0.0, 1e-5);
  EXPECT_GT(model.weights[0], 0.0);
}

TEST(LrTrain, ObjectiveTraceStartsAtLogTwoAndDecreases) {
  const Fixture2d fx;
  const auto model = sb::lr_train(make_csr(fx.x), fx.y, 0.25);
  const auto& trace = model.solver_report.objective_trace;
  ASSERT_GE(trace.size(), 2u);
  // At w = 0, b = 0 every sample contributes log(1 + e^0).
  EXPECT_NEAR(trace.front(), std::log(2.0), 1e-15);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    EXPECT_LT(trace[k], trace[k - 1]) << "step " << k;
  }
  EXPECT_DOUBLE_EQ(trace.back(), model.solver_report.final_objective);
}

TEST(LrTrain, DefaultLambdaIsOneOverN) {
  const Fixture1d fx;
  const auto model = sb::lr_train(make_csr(fx.x), fx.y);
  EXPECT_DOUBLE_EQ(model.reg_lambda, 0.25);
}

TEST(LrTrain, RejectsBadInputs) {
  const Fixture1d fx;
  EXPECT_THROW(sb::lr_train(make_csr(fx.x), std::vector<int>{1, 1, 1, 1}), sb::InputError);
  EXPECT_THROW(sb::lr_train(make_csr(fx.x), std::vector<int>{0, 0, 2, 1}), sb::InputError);
  EXPECT_THROW(sb::lr_train(make_csr(fx.x), fx.y, -1.0), sb::InputError);
}

TEST(LrPredictProba, IsSigmoidOfScore) {
  const Fixture1d fx;
  const auto x = make_csr(fx.x);
  const auto model = sb::lr_train(x, fx.y, 0.1);
  const auto scores = sb::decision_scores(model, x);
  const auto probs = sb::lr_predict_proba(model, x);
  ASSERT_EQ(probs.size(), scores.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    EXPECT_GT(probs[i], 0.0);
    EXPECT_LT(probs[i], 1.0);
    EXPECT_NEAR(probs[i], 1.0 / (1.0 + std::exp(-scores[i])), 1e-12);
  }
  EXPECT_LT(probs[0], 0.5);
  EXPECT_GT(probs[3], 0.5);
}

TEST(PredictLabels, StrictlyPositiveThreshold) {
  const std::vector<double> scores = {-1.0, 0.0, 1e-9, 0.5};
  EXPECT_EQ(sb::predict_labels(scores), (std::vector<int>{0, 0, 1, 1}));
}

TEST(SvmTrain, MatchesGridOracle1d) {
  const Fixture1d fx;
  const double lambda = 0.1;
  // Long run: the oracle check measures solution quality, not speed.
  const auto model = sb::svm_train(make_csr(fx.x), fx.y, lambda, 4000, 42);

  const double oracle = grid_minimize(
      [&](const std::vector<double>& p) {
        return svm_objective_dense(fx.x, fx.y, {p[0]}, p[1], lambda);
      },
      {-10.0, -10.0}, {10.0, 10.0}, 41, 8);

  ASSERT_GT(oracle, 0.0);
  EXPECT_NEAR(model.solver_report.final_objective, oracle, 0.02 * oracle);
  EXPECT_NEAR(model.solver_report.final_objective,
              svm_objective_dense(fx.x, fx.y, model.weights, model.bias, lambda), 1e-12);
}

TEST(SvmTrain, MatchesGridOracle2d) {
  const Fixture2d fx;
  const double lambda = 0.2;
  const auto model = sb::svm_train(make_csr(fx.x), fx.y, lambda, 4000, 42);

  const double oracle = grid_minimize(
      [&](const std::vector<double>& p) {
        return svm_objective_dense(fx.x, fx.y, {p[0], p[1]}, p[2], lambda);
      },
      {-8.0, -8.0, -8.0}, {8.0, 8.0, 8.0}, 33, 8);

  ASSERT_GT(oracle, 0.0);
  EXPECT_NEAR(model.solver_report.final_objective, oracle, 0.02 * oracle);
}

TEST(SvmTrain, SeparatesWithDefaults) {
  const Fixture1d fx;
  const auto model = sb::svm_train(make_csr(fx.x), fx.y);
  const auto labels = sb::predict_labels(sb::decision_scores(model, make_csr(fx.x)));
  EXPECT_EQ(labels, fx.y);
}

TEST(SvmTrain, DeterministicPerSeed) {
  const Fixture2d fx;
  const auto x = make_csr(fx.x);
  const auto a = sb::svm_train(x, fx.y, 0.2, 50, 7);
  const auto b = sb::svm_train(x, fx.y, 0.2, 50, 7);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  const auto c = sb::svm_train(x, fx.y, 0.2, 50, 8);
  EXPECT_NE(a.weights, c.weights);
}

TEST(SvmTrain, RejectsBadInputs) {
  const Fixture1d fx;
  EXPECT_THROW(sb::svm_train(make_csr(fx.x), std::vector<int>{0, 0, 0, 0}), sb::InputError);
  EXPECT_THROW(sb::svm_train(make_csr(fx.x), fx.y, 0.0), sb::InputError);
  EXPECT_THROW(sb::svm_train(make_csr(fx.x), fx.y, std::nullopt, 0), sb::InputError);
}

TEST(LinearJson, RoundTripPreservesScores) {
  const Fixture2d fx;
  const auto x = make_csr(fx.x);
  for (const auto& model :
       {sb::lr_train(x, fx.y, 0.25), sb::svm_train(x, fx.y, 0.2, 50, 42)}) {
    const auto restored = sb::linear_from_json(sb::linear_to_json(model));
    EXPECT_EQ(restored.weights, model.weights);
    EXPECT_EQ(restored.bias, model.bias);
    EXPECT_EQ(restored.kind, model.kind);
    EXPECT_EQ(restored.reg_lambda, model.reg_lambda);
    EXPECT_EQ(sb::decision_scores(restored, x), sb::decision_scores(model, x));
  }
}

TEST(LinearJson, RejectsMalformedDocuments) {
  EXPECT_THROW(sb::linear_from_json(nlohmann::json{{"weights", {1.0}}}), sb::InputError);
  EXPECT_THROW(sb::linear_from_json(nlohmann::json{
                   {"kind", "rbf"}, {"weights", {1.0}}, {"bias", 0.0}, {"lambda", 1.0}}),
               sb::InputError);
}

TEST(LrPredictProba, RejectsHingeModels) {
  const Fixture1d fx;
  const auto x = make_csr(fx.x);
  const auto model = sb::svm_train(x, fx.y);
  EXPECT_THROW(sb::lr_predict_proba(model, x), sb::Error);
}

}  // namespace
