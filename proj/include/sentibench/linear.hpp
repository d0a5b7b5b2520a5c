#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentibench/csr.hpp"
#include "sentibench/error.hpp"
#include "sentibench/prng.hpp"

namespace sentibench {

enum class LinearKind { kLogistic, kHinge };

struct SolverReport {
  std::size_t iterations = 0;
  double final_objective = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per accepted step
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::kLogistic;
  double reg_lambda = 0.0;
  SolverReport solver_report;
};

namespace detail {

inline void check_binary_labels(std::span<const int> y) {
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) {
      has0 = true;
    } else if (v == 1) {
      has1 = true;
    } else {
      throw InputError("labels must be 0 or 1");
    }
  }
  if (!has0 || !has1) throw InputError("training labels contain a single class");
}

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow for large |m|.
inline double softplus_neg(double m) {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// (1/n) Σ log(1+exp(−ŷ·s)) + (λ/2)‖w‖², bias excluded from the penalty.
inline double lr_objective(const CsrMatrix& x, std::span<const int> y,
                           std::span<const double> w, double b, double lambda) {
  const double n = static_cast<double>(x.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double yhat = y[i] == 1 ? 1.0 : -1.0;
    loss += softplus_neg(yhat * (x.dot_row(i, w) + b));
  }
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return loss / n + 0.5 * lambda * penalty;
}

}  // namespace detail

// Full-batch gradient descent with Armijo backtracking on the L2-regularized
// logistic loss. ŷ ∈ {−1,+1}; the bias is unregularized. Stops when the
// gradient ∞-norm falls to tol or after max_iter accepted steps. Deterministic.
// reg_lambda defaults to 1/n when not given.
inline LinearModel lr_train(const CsrMatrix& x, std::span<const int> y,
                            std::optional<double> reg_lambda = std::nullopt, double tol = 1e-7,
                            std::size_t max_iter = 2000) {
  if (x.rows != y.size()) throw Error("lr_train: row/label count mismatch");
  detail::check_binary_labels(y);
  const double n = static_cast<double>(x.rows);
  const double lambda = reg_lambda.value_or(1.0 / n);
  if (lambda <= 0.0) throw InputError("lr_train: reg_lambda must be positive");

  std::vector<double> w(x.cols, 0.0);
  double b = 0.0;
  double obj = detail::lr_objective(x, y, w, b, lambda);

  LinearModel model;
  model.kind = LinearKind::kLogistic;
  model.reg_lambda = lambda;
  model.solver_report.objective_trace.push_back(obj);

  std::vector<double> grad_w(x.cols);
  std::vector<double> w_trial(x.cols);
  double step = 1.0;
  constexpr double kArmijo = 1e-4;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double yhat = y[i] == 1 ? 1.0 : -1.0;
      const double s = x.dot_row(i, w) + b;
      // d/ds log(1+exp(−ŷ s)) = −ŷ·σ(−ŷ s)
      const double coeff = -yhat * detail::sigmoid(-yhat * s);
      const auto cols = x.row_cols(i);
      const auto vals = x.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) grad_w[cols[k]] += coeff * vals[k];
      grad_b += coeff;
    }
    double grad_sq = 0.0;
    double grad_inf = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      grad_w[j] = grad_w[j] / n + lambda * w[j];
      grad_sq += grad_w[j] * grad_w[j];
      grad_inf = std::max(grad_inf, std::abs(grad_w[j]));
    }
    grad_b /= n;
    grad_sq += grad_b * grad_b;
    grad_inf = std::max(grad_inf, std::abs(grad_b));

    if (grad_inf <= tol) {
      model.solver_report.converged = true;
      break;
    }

    step *= 2.0;  // optimistic restart, then backtrack
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      for (std::size_t j = 0; j < x.cols; ++j) w_trial[j] = w[j] - step * grad_w[j];
      const double b_trial = b - step * grad_b;
      const double obj_trial = detail::lr_objective(x, y, w_trial, b_trial, lambda);
      if (obj_trial <= obj - kArmijo * step * grad_sq) {
        w.swap(w_trial);
        b = b_trial;
        obj = obj_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: no further progress possible
    model.solver_report.iterations = iter + 1;
    model.solver_report.objective_trace.push_back(obj);
  }

  model.weights = std::move(w);
  model.bias = b;
  model.solver_report.final_objective = obj;
  return model;
}

// w·x + b per row. Label prediction is 1 iff the score is strictly positive.
inline std::vector<double> decision_scores(const LinearModel& model, const CsrMatrix& x) {
  if (x.cols != model.weights.size()) throw Error("decision_scores: feature width mismatch");
  std::vector<double> scores(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) scores[i] = x.dot_row(i, model.weights) + model.bias;
  return scores;
}

inline std::vector<int> predict_labels(std::span<const double> scores) {
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] > 0.0 ? 1 : 0;
  return labels;
}

inline std::vector<double> lr_predict_proba(const LinearModel& model, const CsrMatrix& x) {
  if (model.kind != LinearKind::kLogistic) {
    throw Error("lr_predict_proba: model is not logistic");
  }
  std::vector<double> p = decision_scores(model, x);
  for (double& v : p) v = detail::sigmoid(v);
  return p;
}

// Pegasos: seeded single-sample subgradient descent on
// (λ/2)‖w‖² + (1/n)Σ max(0, 1−ŷᵢ·s(xᵢ)) with step 1/(λt). The returned
// model averages the post-update iterates of the last half of training,
// which damps the oscillation inherent to subgradient steps. The bias is
// unregularized and moves only on margin violations.
inline LinearModel svm_train(const CsrMatrix& x, std::span<const int> y,
                             std::optional<double> reg_lambda = std::nullopt,
                             std::size_t epochs = 50, std::uint64_t seed = 42) {
  if (x.rows != y.size()) throw Error("svm_train: row/label count mismatch");
  detail::check_binary_labels(y);
  const std::size_t n = x.rows;
  const double lambda = reg_lambda.value_or(1.0 / static_cast<double>(n));
  if (lambda <= 0.0) throw InputError("svm_train: reg_lambda must be positive");
  if (epochs == 0) throw InputError("svm_train: epochs must be positive");

  // w is kept as scale·v so the per-step shrink (1−1/t) is O(1).
  std::vector<double> v(x.cols, 0.0);
  double scale = 1.0;
  double b = 0.0;

  const std::uint64_t total = static_cast<std::uint64_t>(epochs) * n;
  const std::uint64_t avg_from = total / 2 + 1;  // steps avg_from..total inclusive
  std::vector<double> w_sum(x.cols, 0.0);
  double b_sum = 0.0;

  SplitMix64 rng(seed);
  for (std::uint64_t t = 1; t <= total; ++t) {
    const std::size_t i = static_cast<std::size_t>(rng.next_below(n));
    const double yhat = y[i] == 1 ? 1.0 : -1.0;
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    const double margin = yhat * (scale * x.dot_row(i, v) + b);

    const double shrink = 1.0 - eta * lambda;  // = 1 − 1/t
    if (shrink == 0.0) {
      std::fill(v.begin(), v.end(), 0.0);
      scale = 1.0;
    } else {
      scale *= shrink;
    }
    if (margin < 1.0) {
      const double c = eta * yhat / scale;
      const auto cols = x.row_cols(i);
      const auto vals = x.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) v[cols[k]] += c * vals[k];
      b += eta * yhat;
    }
    if (t >= avg_from) {
      for (std::size_t j = 0; j < x.cols; ++j) w_sum[j] += scale * v[j];
      b_sum += b;
    }
  }

  const double count = static_cast<double>(total - avg_from + 1);
  LinearModel model;
  model.kind = LinearKind::kHinge;
  model.reg_lambda = lambda;
  model.weights.resize(x.cols);
  for (std::size_t j = 0; j < x.cols; ++j) model.weights[j] = w_sum[j] / count;
  model.bias = b_sum / count;
  model.solver_report.iterations = total;
  model.solver_report.converged = true;

  double hinge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yhat = y[i] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yhat * (x.dot_row(i, model.weights) + model.bias));
  }
  double penalty = 0.0;
  for (double wj : model.weights) penalty += wj * wj;
  model.solver_report.final_objective = 0.5 * lambda * penalty + hinge / static_cast<double>(n);
  return model;
}

inline nlohmann::json linear_to_json(const LinearModel& model) {
  return nlohmann::json{
      {"format_version", 1},
      {"kind", model.kind == LinearKind::kLogistic ? "logistic" : "hinge"},
      {"lambda", model.reg_lambda},
      {"bias", model.bias},
      {"weights", model.weights},
  };
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
  if (!j.contains("kind") || !j.contains("weights")) {
    throw InputError("linear model JSON missing required fields");
  }
  LinearModel model;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "logistic") {
    model.kind = LinearKind::kLogistic;
  } else if (kind == "hinge") {
    model.kind = LinearKind::kHinge;
  } else {
    throw InputError("linear model JSON has unknown kind: " + kind);
  }
  model.reg_lambda = j.at("lambda").get<double>();
  model.bias = j.at("bias").get<double>();
  model.weights = j.at("weights").get<std::vector<double>>();
  return model;
}

}  // namespace sentibench
